#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pqoslat/kpidata.hpp"
#include "pqoslat/nn/layers.hpp"
#include "pqoslat/pipe/metrics.hpp"
#include "pqoslat/pipe/standardize.hpp"

namespace pqoslat::pipe {

struct DetectorConfig {
    std::vector<std::size_t> hidden = {8}; // encoder widths before the bottleneck
    std::size_t bottleneck = 3;
    int epochs = 80;
    int batch_size = 128;
    double learning_rate = 1e-2;
    std::uint64_t seed = 1;
};

/// Autoencoder on the standardized (features + label) rows; the anomaly score
/// is the reconstruction squared error. Scores are comparable across records
/// because the standardization is fitted on normal training rows only.
class AnomalyDetector {
public:
    /// `normal_train` must contain no labeled anomalies.
    static AnomalyDetector fit(std::span<const kpi::KpiRecord> normal_train,
                               const DetectorConfig& config);

    double score(const kpi::KpiRecord& record) const;
    std::vector<double> scores(std::span<const kpi::KpiRecord> records) const;

    const DetectorConfig& config() const { return config_; }
    double final_loss() const { return final_loss_; }

    void save(const std::filesystem::path& path) const;
    static AnomalyDetector load(const std::filesystem::path& path);

private:
    AnomalyDetector() = default;

    DetectorConfig config_;
    Standardizer standardizer_;
    nn::Autoencoder autoencoder_;
    double final_loss_ = 0.0;
};

/// Threshold minimizing c_fp * FP + c_fn * FN over the score midpoints (plus
/// one candidate below and above all scores); ties resolve to the smaller
/// threshold. labels: 1 = anomaly. Throws ParameterError on single-class
/// labels or non-finite scores.
double tune_threshold(std::span<const double> scores, std::span<const int> labels,
                      double cost_fp = 1.0, double cost_fn = 1.0);

enum class DetectFlag { normal, anomaly };

/// Anomaly iff score > gamma (strict: a score exactly at gamma is normal).
/// The likelihood form f(x,y) <= Gamma maps onto this via score = -log f.
DetectFlag detect(const AnomalyDetector& detector, const kpi::KpiRecord& record,
                  double gamma);

struct AnomalyReport {
    double gamma = 0.0;
    Confusion confusion;
    struct Row {
        std::int64_t timestamp = 0;
        std::string cell_id;
        double score = 0.0;
        int flag = 0;
        int label = 0;
    };
    std::vector<Row> rows;
};

/// Scores a labeled test set at the given threshold.
AnomalyReport evaluate_detector(const AnomalyDetector& detector,
                                std::span<const kpi::KpiRecord> records,
                                std::span<const int> labels, double gamma);

} // namespace pqoslat::pipe
