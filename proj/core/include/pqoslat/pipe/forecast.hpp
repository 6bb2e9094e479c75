#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqoslat/kpidata.hpp"
#include "pqoslat/nn/layers.hpp"
#include "pqoslat/pipe/standardize.hpp"

namespace pqoslat::pipe {

/// One supervised pair: `lookback` consecutive (features + label) rows of a
/// single cell, predicting the label one bin (15 min) ahead.
struct ForecastWindow {
    std::vector<std::vector<double>> steps; // lookback rows of dim 11
    double target = 0.0;                    // label at t+1
    std::int64_t target_timestamp = 0;
    std::string cell_id;
};

struct WindowSet {
    std::vector<ForecastWindow> windows;
    std::size_t dropped_gaps = 0; // windows discarded because bins were missing
};

/// Builds windows per cell from a chronological record span. Windows never
/// straddle missing bins (dropped and counted) and callers split train/test
/// BEFORE windowing, so no window crosses the boundary. Throws ParameterError
/// when a cell's series is shorter than lookback + 1.
WindowSet make_forecast_windows(std::span<const kpi::KpiRecord> records, int lookback);

struct ForecastConfig {
    int lookback = 8;
    std::size_t hidden = 24;
    int epochs = 25;
    int batch_size = 128;
    double learning_rate = 5e-3;
    double sigma_floor = 1e-3;
    std::uint64_t seed = 1;
};

struct ForecastReport {
    std::string model;
    double r2 = 0.0;
    double baseline_r2 = 0.0; // persistence (predict y_t) for the LSTM report
    int horizon = 1;          // bins ahead
    std::size_t parameter_count = 0;
};

/// Probabilistic LSTM forecaster (Gaussian head, trained by NLL).
class LstmForecaster {
public:
    static LstmForecaster train(std::span<const kpi::KpiRecord> train_records,
                                const ForecastConfig& config);

    /// Predictive mean and stddev (ms) for one window.
    std::pair<double, double> predict(const ForecastWindow& window) const;

    ForecastReport evaluate(std::span<const kpi::KpiRecord> test_records) const;

    const ForecastConfig& config() const { return config_; }

private:
    LstmForecaster() = default;

    nn::Tensor pack_batch(std::span<const ForecastWindow> windows, int step) const;

    ForecastConfig config_;
    Standardizer standardizer_; // over the 11-dim step rows
    nn::LstmCell cell_;
    nn::Dense head_mu_;
    nn::Dense head_sigma_;
    double label_mean_ = 0.0;
    double label_std_ = 1.0;
};

struct SpatialConfig {
    std::size_t sage_hidden = 16;
    int sage_layers = 3;
    std::size_t dnn_hidden = 32;
    int epochs = 60;
    int batch_timestamps = 16;
    double learning_rate = 1e-2;
    int train_days = 20;
    int test_days = 10;
    std::uint64_t seed = 1;
};

/// Trains a GraphSAGE regressor (per-timestamp graph forward) against a
/// per-record DNN of comparable parameter count on the same day split and
/// returns both test reports (sage first).
std::pair<ForecastReport, ForecastReport> train_spatial_models(
    std::span<const kpi::KpiRecord> records, const kpi::CellGraph& graph,
    const SpatialConfig& config);

} // namespace pqoslat::pipe
