#include "pqoslat/pipe/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "pqoslat/errors.hpp"
#include "pqoslat/nn/losses.hpp"
#include "pqoslat/nn/optim.hpp"
#include "pqoslat/pipe/metrics.hpp"

namespace pqoslat::pipe {

using nn::Tensor;

WindowSet make_forecast_windows(std::span<const kpi::KpiRecord> records, int lookback) {
    if (lookback < 1) throw ParameterError("lookback must be at least 1");
    std::map<std::string, std::vector<const kpi::KpiRecord*>> per_cell;
    for (const auto& r : records) per_cell[r.cell_id].push_back(&r);

    WindowSet out;
    for (auto& [cell, series] : per_cell) {
        std::sort(series.begin(), series.end(),
                  [](const kpi::KpiRecord* a, const kpi::KpiRecord* b) {
                      return a->timestamp < b->timestamp;
                  });
        if (series.size() < static_cast<std::size_t>(lookback) + 1) {
            throw ParameterError("cell " + cell + " has " +
                                 std::to_string(series.size()) +
                                 " bins, need lookback + 1 = " +
                                 std::to_string(lookback + 1));
        }
        for (std::size_t start = 0; start + lookback < series.size(); ++start) {
            bool contiguous = true;
            for (std::size_t k = 0; k < static_cast<std::size_t>(lookback); ++k) {
                if (series[start + k + 1]->timestamp !=
                    series[start + k]->timestamp + kpi::kBinSeconds) {
                    contiguous = false;
                    break;
                }
            }
            if (!contiguous) {
                ++out.dropped_gaps;
                continue;
            }
            ForecastWindow w;
            w.cell_id = cell;
            for (std::size_t k = 0; k < static_cast<std::size_t>(lookback); ++k) {
                w.steps.push_back(feature_label_row(*series[start + k]));
            }
            w.target = series[start + lookback]->label_latency_ms;
            w.target_timestamp = series[start + lookback]->timestamp;
            out.windows.push_back(std::move(w));
        }
    }
    if (out.dropped_gaps > 0) {
        std::cerr << "make_forecast_windows: dropped " << out.dropped_gaps
                  << " windows spanning missing bins\n";
    }
    return out;
}

Tensor LstmForecaster::pack_batch(std::span<const ForecastWindow> windows, int step) const {
    const std::size_t dim = standardizer_.dim();
    std::vector<double> flat;
    flat.reserve(windows.size() * dim);
    for (const auto& w : windows) {
        const auto row = standardizer_.transform(w.steps[step]);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return Tensor::constant(std::move(flat), windows.size(), dim);
}

LstmForecaster LstmForecaster::train(std::span<const kpi::KpiRecord> train_records,
                                     const ForecastConfig& config) {
    LstmForecaster model;
    model.config_ = config;

    auto window_set = make_forecast_windows(train_records, config.lookback);
    auto& windows = window_set.windows;
    if (windows.empty()) throw ParameterError("no training windows");

    std::vector<std::vector<double>> step_rows;
    for (const auto& w : windows) {
        for (const auto& s : w.steps) step_rows.push_back(s);
    }
    model.standardizer_ = Standardizer::fit(step_rows);

    // Standardize the target with train statistics only.
    {
        std::vector<double> targets;
        targets.reserve(windows.size());
        for (const auto& w : windows) targets.push_back(w.target);
        double mean = 0.0;
        for (double t : targets) mean += t;
        mean /= static_cast<double>(targets.size());
        double var = 0.0;
        for (double t : targets) var += (t - mean) * (t - mean);
        model.label_mean_ = mean;
        model.label_std_ = std::max(std::sqrt(var / targets.size()), 1e-9);
    }

    Rng init_rng = Rng::substream(config.seed, 21);
    Rng shuffle_rng = Rng::substream(config.seed, 23);
    const std::size_t dim = model.standardizer_.dim();
    model.cell_ = nn::LstmCell(dim, config.hidden, init_rng);
    model.head_mu_ = nn::Dense(config.hidden, 1, init_rng);
    model.head_sigma_ = nn::Dense(config.hidden, 1, init_rng);

    std::vector<Tensor> params = model.cell_.parameters();
    for (auto& p : model.head_mu_.parameters()) params.push_back(p);
    for (auto& p : model.head_sigma_.parameters()) params.push_back(p);

    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    adam_cfg.clip_norm = 5.0;
    nn::Adam optimizer(params, adam_cfg);

    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        }
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<ForecastWindow> batch;
            batch.reserve(stop - start);
            std::vector<double> targets;
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(windows[order[k]]);
                targets.push_back((windows[order[k]].target - model.label_mean_) /
                                  model.label_std_);
            }
            std::vector<Tensor> sequence;
            for (int t = 0; t < config.lookback; ++t) {
                sequence.push_back(model.pack_batch(batch, t));
            }
            Tensor h = nn::lstm_forward(model.cell_, sequence);
            Tensor mu = model.head_mu_.forward(h);
            Tensor sigma = add_scalar(softplus(model.head_sigma_.forward(h)),
                                      config.sigma_floor);
            Tensor loss = nn::gaussian_nll(mu, sigma, targets);
            if (!std::isfinite(loss.item())) {
                throw TrainingError("lstm diverged at epoch " + std::to_string(epoch));
            }
            optimizer.zero_grad();
            nn::backward(loss);
            optimizer.step();
        }
    }
    return model;
}

std::pair<double, double> LstmForecaster::predict(const ForecastWindow& window) const {
    std::vector<Tensor> sequence;
    for (int t = 0; t < config_.lookback; ++t) {
        const auto row = standardizer_.transform(window.steps[t]);
        sequence.push_back(Tensor::constant(std::vector<double>(row), 1, row.size()));
    }
    Tensor h = nn::lstm_forward(cell_, sequence);
    const double mu_std = head_mu_.forward(h).value()[0];
    Tensor sraw = head_sigma_.forward(h);
    const double sigma_std =
        std::log1p(std::exp(std::min(sraw.value()[0], 30.0))) + config_.sigma_floor;
    return {mu_std * label_std_ + label_mean_, sigma_std * label_std_};
}

ForecastReport LstmForecaster::evaluate(std::span<const kpi::KpiRecord> test_records) const {
    auto window_set = make_forecast_windows(test_records, config_.lookback);
    const auto& windows = window_set.windows;
    if (windows.empty()) throw ParameterError("no evaluation windows");

    std::vector<double> preds, persistence, truths;
    preds.reserve(windows.size());
    for (const auto& w : windows) {
        preds.push_back(predict(w).first);
        persistence.push_back(w.steps.back().back()); // label of the last step
        truths.push_back(w.target);
    }
    ForecastReport report;
    report.model = "lstm-gaussian";
    report.horizon = 1;
    report.r2 = r2_score(preds, truths);
    report.baseline_r2 = r2_score(persistence, truths);
    std::size_t count = 0;
    for (const auto& p : cell_.parameters()) count += p.size();
    count += head_mu_.parameter_count() + head_sigma_.parameter_count();
    report.parameter_count = count;
    return report;
}

namespace {

struct TimestampBlock {
    std::vector<double> features; // (n_cells x dim) standardized
    std::vector<double> targets;  // n_cells, standardized labels
};

// Records arranged as per-timestamp matrices aligned with the graph order.
std::vector<TimestampBlock> block_by_timestamp(std::span<const kpi::KpiRecord> records,
                                               const kpi::CellGraph& graph,
                                               const Standardizer& std_,
                                               double label_mean, double label_std) {
    std::map<std::int64_t, std::vector<const kpi::KpiRecord*>> by_ts;
    for (const auto& r : records) by_ts[r.timestamp].push_back(&r);
    const std::size_t n = graph.size();
    const std::size_t dim = std_.dim();
    std::vector<TimestampBlock> blocks;
    for (auto& [ts, rows] : by_ts) {
        if (rows.size() != n) continue; // incomplete snapshot: skip
        TimestampBlock block;
        block.features.assign(n * dim, 0.0);
        block.targets.assign(n, 0.0);
        for (const auto* r : rows) {
            const int v = graph.index_of(r->cell_id);
            if (v < 0) throw ParameterError("record cell " + r->cell_id + " not in graph");
            const auto row = std_.transform(feature_row(*r));
            std::copy(row.begin(), row.end(), block.features.begin() + v * dim);
            block.targets[v] = (r->label_latency_ms - label_mean) / label_std;
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

} // namespace

std::pair<ForecastReport, ForecastReport> train_spatial_models(
    std::span<const kpi::KpiRecord> records, const kpi::CellGraph& graph,
    const SpatialConfig& config) {
    for (const auto& r : records) {
        if (graph.index_of(r.cell_id) < 0) {
            throw ParameterError("graph does not cover cell " + r.cell_id);
        }
    }
    const auto [train, test] =
        kpi::split_by_days(records, config.train_days, config.test_days);
    if (train.empty() || test.empty()) throw ParameterError("empty split");

    std::vector<std::vector<double>> raw_rows;
    raw_rows.reserve(train.size());
    for (const auto& r : train) raw_rows.push_back(feature_row(r));
    const Standardizer std_ = Standardizer::fit(raw_rows);

    double label_mean = 0.0;
    for (const auto& r : train) label_mean += r.label_latency_ms;
    label_mean /= static_cast<double>(train.size());
    double label_var = 0.0;
    for (const auto& r : train) {
        const double d = r.label_latency_ms - label_mean;
        label_var += d * d;
    }
    const double label_std =
        std::max(std::sqrt(label_var / static_cast<double>(train.size())), 1e-9);

    const auto train_blocks = block_by_timestamp(train, graph, std_, label_mean, label_std);
    const auto test_blocks = block_by_timestamp(test, graph, std_, label_mean, label_std);
    if (train_blocks.empty() || test_blocks.empty()) {
        throw ParameterError("no complete per-timestamp snapshots");
    }

    const std::size_t n_cells = graph.size();
    const std::size_t dim = std_.dim();
    const Tensor agg = nn::mean_aggregation_matrix(graph);

    // --- GraphSAGE stack ---
    Rng sage_rng = Rng::substream(config.seed, 31);
    std::vector<nn::SageLayer> sage_layers;
    for (int l = 0; l < config.sage_layers; ++l) {
        sage_layers.emplace_back(l == 0 ? dim : config.sage_hidden, config.sage_hidden,
                                 nn::SageLayer::Activation::tanh, sage_rng);
    }
    nn::Dense sage_head(config.sage_hidden, 1, sage_rng);

    std::vector<Tensor> sage_params;
    for (auto& layer : sage_layers) {
        for (auto& p : layer.parameters()) sage_params.push_back(p);
    }
    for (auto& p : sage_head.parameters()) sage_params.push_back(p);
    std::size_t sage_count = 0;
    for (const auto& p : sage_params) sage_count += p.size();

    auto sage_forward = [&](const TimestampBlock& block) {
        Tensor h = Tensor::constant(std::vector<double>(block.features), n_cells, dim);
        for (const auto& layer : sage_layers) h = layer.forward(h, agg);
        return sage_head.forward(h); // (n_cells, 1)
    };

    {
        nn::AdamConfig adam_cfg;
        adam_cfg.learning_rate = config.learning_rate;
        nn::Adam optimizer(sage_params, adam_cfg);
        Rng shuffle_rng = Rng::substream(config.seed, 33);
        std::vector<std::size_t> order(train_blocks.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
            }
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(config.batch_timestamps)) {
                const std::size_t stop = std::min(
                    order.size(), start + static_cast<std::size_t>(config.batch_timestamps));
                Tensor loss;
                for (std::size_t k = start; k < stop; ++k) {
                    const auto& block = train_blocks[order[k]];
                    Tensor target = Tensor::constant(std::vector<double>(block.targets),
                                                     n_cells, 1);
                    Tensor part = mean_all(square(sub(sage_forward(block), target)));
                    loss = loss.defined() ? add(loss, part) : part;
                }
                loss = scale(loss, 1.0 / static_cast<double>(stop - start));
                if (!std::isfinite(loss.item())) {
                    throw TrainingError("sage diverged at epoch " + std::to_string(epoch));
                }
                optimizer.zero_grad();
                nn::backward(loss);
                optimizer.step();
            }
        }
    }

    // --- per-record DNN baseline of comparable size ---
    Rng dnn_rng = Rng::substream(config.seed, 41);
    nn::Dense dnn1(dim, config.dnn_hidden, dnn_rng);
    nn::Dense dnn2(config.dnn_hidden, config.dnn_hidden, dnn_rng);
    nn::Dense dnn3(config.dnn_hidden, 1, dnn_rng);
    std::vector<Tensor> dnn_params;
    for (auto* layer : {&dnn1, &dnn2, &dnn3}) {
        for (auto& p : layer->parameters()) dnn_params.push_back(p);
    }
    std::size_t dnn_count = 0;
    for (const auto& p : dnn_params) dnn_count += p.size();

    auto dnn_forward = [&](const Tensor& x) {
        return dnn3.forward(tanh_op(dnn2.forward(tanh_op(dnn1.forward(x)))));
    };

    {
        nn::AdamConfig adam_cfg;
        adam_cfg.learning_rate = config.learning_rate;
        nn::Adam optimizer(dnn_params, adam_cfg);
        Rng shuffle_rng = Rng::substream(config.seed, 43);
        // Same snapshots flattened to records keep the training data identical.
        std::vector<std::size_t> order(train_blocks.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
            }
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(config.batch_timestamps)) {
                const std::size_t stop = std::min(
                    order.size(), start + static_cast<std::size_t>(config.batch_timestamps));
                std::vector<double> flat, targets;
                for (std::size_t k = start; k < stop; ++k) {
                    const auto& block = train_blocks[order[k]];
                    flat.insert(flat.end(), block.features.begin(), block.features.end());
                    targets.insert(targets.end(), block.targets.begin(), block.targets.end());
                }
                const std::size_t rows = (stop - start) * n_cells;
                Tensor x = Tensor::constant(std::move(flat), rows, dim);
                Tensor target = Tensor::constant(std::move(targets), rows, 1);
                Tensor loss = mean_all(square(sub(dnn_forward(x), target)));
                if (!std::isfinite(loss.item())) {
                    throw TrainingError("dnn diverged at epoch " + std::to_string(epoch));
                }
                optimizer.zero_grad();
                nn::backward(loss);
                optimizer.step();
            }
        }
    }

    // --- shared evaluation over the test snapshots ---
    std::vector<double> sage_preds, dnn_preds, truths;
    for (const auto& block : test_blocks) {
        const Tensor sp = sage_forward(block);
        Tensor x = Tensor::constant(std::vector<double>(block.features), n_cells, dim);
        const Tensor dp = dnn_forward(x);
        for (std::size_t v = 0; v < n_cells; ++v) {
            sage_preds.push_back(sp.value()[v] * label_std + label_mean);
            dnn_preds.push_back(dp.value()[v] * label_std + label_mean);
            truths.push_back(block.targets[v] * label_std + label_mean);
        }
    }
    ForecastReport sage_report;
    sage_report.model = "graphsage";
    sage_report.r2 = r2_score(sage_preds, truths);
    sage_report.parameter_count = sage_count;
    ForecastReport dnn_report;
    dnn_report.model = "dnn-baseline";
    dnn_report.r2 = r2_score(dnn_preds, truths);
    dnn_report.parameter_count = dnn_count;
    sage_report.baseline_r2 = dnn_report.r2;
    dnn_report.baseline_r2 = dnn_report.r2;
    return {sage_report, dnn_report};
}

} // namespace pqoslat::pipe
