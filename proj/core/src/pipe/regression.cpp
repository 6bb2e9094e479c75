#include "pqoslat/pipe/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pqoslat/distributions.hpp"
#include "pqoslat/errors.hpp"
#include "pqoslat/nn/checkpoint.hpp"
#include "pqoslat/nn/optim.hpp"
#include "pqoslat/pipe/metrics.hpp"

namespace pqoslat::pipe {

namespace {

using nn::Tensor;

// Equal-weight pool of hypoexponential components (one per weight draw).
class PredictiveMixture {
public:
    void add(std::vector<double> rates) {
        components_.push_back(make_hypoexponential(std::move(rates)));
    }

    double mean() const {
        double acc = 0.0;
        for (const auto& c : components_) acc += c.mean();
        return acc / static_cast<double>(components_.size());
    }

    double cdf(double t) const {
        double acc = 0.0;
        for (const auto& c : components_) acc += c.cdf(t);
        return acc / static_cast<double>(components_.size());
    }

    double quantile(double u) const {
        double lo = 0.0;
        double hi = 0.0;
        for (const auto& c : components_) hi = std::max(hi, c.quantile(u));
        hi = std::max(hi, 1e-9);
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < u ? lo : hi) = mid;
            if (hi - lo <= 1e-10 * std::max(1.0, hi)) break;
        }
        return 0.5 * (lo + hi);
    }

    double nll(double y) const {
        double acc = 0.0;
        for (const auto& c : components_) acc += c.pdf(y);
        acc /= static_cast<double>(components_.size());
        return -std::log(std::max(acc, 1e-300));
    }

private:
    std::vector<ContinuousDistribution> components_;
};

std::vector<std::vector<double>> standardized_rows(
    std::span<const kpi::KpiRecord> records, const Standardizer& std_) {
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(std_.transform(feature_row(r)));
    return rows;
}

Tensor pack_rows(const std::vector<std::vector<double>>& rows,
                 std::span<const std::size_t> idx) {
    const std::size_t dim = rows.front().size();
    std::vector<double> flat;
    flat.reserve(idx.size() * dim);
    for (std::size_t i : idx) {
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return Tensor::constant(std::move(flat), idx.size(), dim);
}

} // namespace

Tensor BnnRegressor::rates_for(const Tensor& x, Rng* rng) const {
    Tensor h1 = tanh_op(input_layer_.forward(x));
    auto [h2, kl] = bayes_layer_.forward(h1, rng);
    Tensor raw = output_layer_.forward(tanh_op(h2));
    return head_.rates(raw);
}

BnnRegressor BnnRegressor::train(std::span<const kpi::KpiRecord> train_records,
                                 const RegressorConfig& config) {
    if (train_records.empty()) throw ParameterError("empty training set");
    if (config.n_mc_samples < 1) throw ParameterError("need n_mc_samples >= 1");

    BnnRegressor model;
    model.config_ = config;
    model.head_.n_stages = config.n_stages;
    model.head_.validate();

    std::vector<std::vector<double>> raw_rows;
    raw_rows.reserve(train_records.size());
    for (const auto& r : train_records) raw_rows.push_back(feature_row(r));
    model.standardizer_ = Standardizer::fit(raw_rows);
    const auto rows = standardized_rows(train_records, model.standardizer_);

    std::vector<double> labels;
    labels.reserve(train_records.size());
    for (const auto& r : train_records) labels.push_back(r.label_latency_ms);

    Rng init_rng = Rng::substream(config.seed, 1);
    Rng eps_rng = Rng::substream(config.seed, 2);
    Rng shuffle_rng = Rng::substream(config.seed, 3);

    const std::size_t in_dim = rows.front().size();
    model.input_layer_ = nn::Dense(in_dim, config.hidden_dense, init_rng);
    model.bayes_layer_ =
        nn::BayesianDense(config.hidden_dense, config.hidden_bayes, config.prior_sigma, init_rng);
    model.output_layer_ =
        nn::Dense(config.hidden_bayes, static_cast<std::size_t>(config.n_stages), init_rng);

    std::vector<Tensor> params = model.input_layer_.parameters();
    for (auto& p : model.bayes_layer_.parameters()) params.push_back(p);
    for (auto& p : model.output_layer_.parameters()) params.push_back(p);

    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    nn::Adam optimizer(params, adam_cfg);

    const double kl_weight = config.kl_weight >= 0.0
                                 ? config.kl_weight
                                 : 1.0 / static_cast<double>(train_records.size());

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Deterministic Fisher-Yates draw order.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        }
        epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            Tensor x = pack_rows(rows, idx);
            std::vector<double> y;
            y.reserve(idx.size());
            for (std::size_t i : idx) y.push_back(labels[i]);

            Tensor h1 = tanh_op(model.input_layer_.forward(x));
            std::vector<Tensor> logliks;
            Tensor kl;
            for (int s = 0; s < config.n_mc_samples; ++s) {
                auto [h2, kl_s] = config.mc_kl
                                      ? model.bayes_layer_.forward_mc_kl(h1, eps_rng)
                                      : model.bayes_layer_.forward(h1, &eps_rng);
                Tensor raw = model.output_layer_.forward(tanh_op(h2));
                logliks.push_back(neg(nn::hypoexp_nll(model.head_.rates(raw), y)));
                kl = kl_s;
            }
            Tensor loss = nn::elbo_loss(logliks, kl, kl_weight);
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value)) {
                throw TrainingError("regressor diverged (non-finite loss) at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(batches));
            }
            optimizer.zero_grad();
            nn::backward(loss);
            optimizer.step();
            epoch_loss += loss_value;
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
    }
    model.final_loss_ = epoch_loss;
    return model;
}

PredictedDistribution BnnRegressor::predict(const kpi::KpiRecord& record,
                                            int k_samples) const {
    if (k_samples < 1) throw ParameterError("need k_samples >= 1");
    const auto row = standardizer_.transform(feature_row(record));
    Tensor x = Tensor::constant(std::vector<double>(row), 1, row.size());

    // Common weight draws across calls keep prediction deterministic and
    // order-independent, and consistent with evaluate().
    PredictiveMixture mixture;
    for (int k = 0; k < k_samples; ++k) {
        Rng draw = Rng::substream(config_.seed, 0x516 + static_cast<std::uint64_t>(k));
        mixture.add(rates_for(x, &draw).value());
    }

    PredictedDistribution out;
    out.mean = mixture.mean();
    out.q025 = mixture.quantile(0.025);
    out.q975 = mixture.quantile(0.975);
    out.rates = rates_for(x, nullptr).value();
    return out;
}

double BnnRegressor::conditional_anomaly_score(const kpi::KpiRecord& record,
                                               int k_samples) const {
    const auto row = standardizer_.transform(feature_row(record));
    Tensor x = Tensor::constant(std::vector<double>(row), 1, row.size());
    PredictiveMixture mixture;
    for (int k = 0; k < k_samples; ++k) {
        Rng draw = Rng::substream(config_.seed, 0x516 + static_cast<std::uint64_t>(k));
        mixture.add(rates_for(x, &draw).value());
    }
    return mixture.nll(record.label_latency_ms);
}

RegressionReport BnnRegressor::evaluate(std::span<const kpi::KpiRecord> test_records,
                                        int k_samples) const {
    if (test_records.empty()) throw ParameterError("empty evaluation set");
    const auto rows = standardized_rows(test_records, standardizer_);
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Tensor x = pack_rows(rows, all);

    const std::size_t n = test_records.size();
    const std::size_t stages = static_cast<std::size_t>(config_.n_stages);
    std::vector<std::vector<double>> draws; // k -> flat (n x stages)
    draws.reserve(k_samples);
    for (int k = 0; k < k_samples; ++k) {
        Rng draw = Rng::substream(config_.seed, 0x516 + static_cast<std::uint64_t>(k));
        draws.push_back(rates_for(x, &draw).value());
    }

    RegressionReport report;
    report.rows.reserve(n);
    std::vector<double> means, truths;
    std::vector<std::pair<double, double>> intervals;
    double nll_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        PredictiveMixture mixture;
        for (int k = 0; k < k_samples; ++k) {
            std::vector<double> rates(draws[k].begin() + i * stages,
                                      draws[k].begin() + (i + 1) * stages);
            mixture.add(std::move(rates));
        }
        RegressionReport::Row row;
        row.timestamp = test_records[i].timestamp;
        row.cell_id = test_records[i].cell_id;
        row.mean = mixture.mean();
        row.q025 = mixture.quantile(0.025);
        row.q975 = mixture.quantile(0.975);
        row.truth = test_records[i].label_latency_ms;
        nll_acc += mixture.nll(row.truth);
        means.push_back(row.mean);
        truths.push_back(row.truth);
        intervals.emplace_back(row.q025, row.q975);
        report.rows.push_back(std::move(row));
    }
    report.mean_nll = nll_acc / static_cast<double>(n);
    report.ci95_coverage = interval_coverage(intervals, truths);
    try {
        report.r2 = r2_score(means, truths);
    } catch (const ValidationError&) {
        report.r2 = 0.0; // constant labels: flagged, not fatal
        report.degenerate_targets = true;
    }
    return report;
}

void BnnRegressor::save(const std::filesystem::path& path) const {
    nlohmann::json cfg;
    cfg["hidden_dense"] = config_.hidden_dense;
    cfg["hidden_bayes"] = config_.hidden_bayes;
    cfg["n_stages"] = config_.n_stages;
    cfg["prior_sigma"] = config_.prior_sigma;
    cfg["seed"] = config_.seed;
    cfg["standardizer"] = standardizer_.to_json();
    nn::save_checkpoint(path, "bnn-hypoexp-regressor", cfg,
                        {{"input.W", input_layer_.W},
                         {"input.b", input_layer_.b},
                         {"bayes.w_mu", bayes_layer_.w_mu},
                         {"bayes.w_rho", bayes_layer_.w_rho},
                         {"bayes.b_mu", bayes_layer_.b_mu},
                         {"bayes.b_rho", bayes_layer_.b_rho},
                         {"output.W", output_layer_.W},
                         {"output.b", output_layer_.b}});
}

BnnRegressor BnnRegressor::load(const std::filesystem::path& path) {
    const auto ckpt = nn::load_checkpoint(path);
    if (ckpt.model_kind != "bnn-hypoexp-regressor") {
        throw SchemaError("checkpoint is not a regressor: " + ckpt.model_kind);
    }
    BnnRegressor model;
    model.config_.hidden_dense = ckpt.config.at("hidden_dense").get<std::size_t>();
    model.config_.hidden_bayes = ckpt.config.at("hidden_bayes").get<std::size_t>();
    model.config_.n_stages = ckpt.config.at("n_stages").get<int>();
    model.config_.prior_sigma = ckpt.config.at("prior_sigma").get<double>();
    model.config_.seed = ckpt.config.at("seed").get<std::uint64_t>();
    model.standardizer_ = Standardizer::from_json(ckpt.config.at("standardizer"));
    model.head_.n_stages = model.config_.n_stages;
    model.input_layer_.W = ckpt.params.at("input.W");
    model.input_layer_.b = ckpt.params.at("input.b");
    model.bayes_layer_.w_mu = ckpt.params.at("bayes.w_mu");
    model.bayes_layer_.w_rho = ckpt.params.at("bayes.w_rho");
    model.bayes_layer_.b_mu = ckpt.params.at("bayes.b_mu");
    model.bayes_layer_.b_rho = ckpt.params.at("bayes.b_rho");
    model.bayes_layer_.prior_sigma = model.config_.prior_sigma;
    model.output_layer_.W = ckpt.params.at("output.W");
    model.output_layer_.b = ckpt.params.at("output.b");
    return model;
}

} // namespace pqoslat::pipe
