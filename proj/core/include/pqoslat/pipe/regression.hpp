#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pqoslat/kpidata.hpp"
#include "pqoslat/nn/layers.hpp"
#include "pqoslat/nn/losses.hpp"
#include "pqoslat/pipe/standardize.hpp"

namespace pqoslat::pipe {

struct RegressorConfig {
    std::size_t hidden_dense = 32;    // deterministic first layer
    std::size_t hidden_bayes = 16;    // variational second layer
    int n_stages = 4;                 // hypoexponential head order
    int epochs = 40;
    int batch_size = 128;
    double learning_rate = 5e-3;
    double kl_weight = -1.0;          // < 0: 1 / n_train
    int n_mc_samples = 1;
    double prior_sigma = 1.0;
    bool mc_kl = false;               // literal Monte-Carlo KL instead of closed form
    std::uint64_t seed = 1;
};

struct PredictedDistribution {
    double mean = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
    std::vector<double> rates; // head rates at the posterior mean weights
};

struct RegressionReport {
    double r2 = 0.0;
    double mean_nll = 0.0;
    double ci95_coverage = 0.0;
    bool degenerate_targets = false; // zero-variance labels: r2 flagged, not crashed
    struct Row {
        std::int64_t timestamp = 0;
        std::string cell_id;
        double mean = 0.0;
        double q025 = 0.0;
        double q975 = 0.0;
        double truth = 0.0;
    };
    std::vector<Row> rows;
};

/// Bayesian probabilistic regressor: dense + variational dense layers feeding
/// a hypoexponential output head, trained by minimizing the variational free
/// energy. Epistemic uncertainty comes from weight sampling, aleatoric from
/// the head.
class BnnRegressor {
public:
    static BnnRegressor train(std::span<const kpi::KpiRecord> train_records,
                              const RegressorConfig& config);

    /// Predictive mixture over k weight samples (equal-weight pooling).
    PredictedDistribution predict(const kpi::KpiRecord& record, int k_samples = 64) const;

    /// Predictive NLL of the record's own label: the conditional
    /// density-threshold anomaly score (method (i)).
    double conditional_anomaly_score(const kpi::KpiRecord& record,
                                     int k_samples = 64) const;

    RegressionReport evaluate(std::span<const kpi::KpiRecord> test_records,
                              int k_samples = 64) const;

    const RegressorConfig& config() const { return config_; }
    const Standardizer& standardizer() const { return standardizer_; }
    double final_loss() const { return final_loss_; }

    void save(const std::filesystem::path& path) const;
    static BnnRegressor load(const std::filesystem::path& path);

private:
    BnnRegressor() = default;

    /// Head rates for a standardized feature matrix under one weight draw
    /// (rng == nullptr: posterior means).
    nn::Tensor rates_for(const nn::Tensor& x, Rng* rng) const;

    RegressorConfig config_;
    Standardizer standardizer_;
    nn::Dense input_layer_;
    nn::BayesianDense bayes_layer_;
    nn::Dense output_layer_;
    nn::HypoexpHead head_;
    double final_loss_ = 0.0;
};

} // namespace pqoslat::pipe
