#include "pqoslat/pipe/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pqoslat/errors.hpp"
#include "pqoslat/nn/checkpoint.hpp"
#include "pqoslat/nn/optim.hpp"

namespace pqoslat::pipe {

using nn::Tensor;

AnomalyDetector AnomalyDetector::fit(std::span<const kpi::KpiRecord> normal_train,
                                     const DetectorConfig& config) {
    if (normal_train.empty()) throw ParameterError("empty training set");

    AnomalyDetector detector;
    detector.config_ = config;

    std::vector<std::vector<double>> raw_rows;
    raw_rows.reserve(normal_train.size());
    for (const auto& r : normal_train) raw_rows.push_back(feature_label_row(r));
    detector.standardizer_ = Standardizer::fit(raw_rows);

    const std::size_t dim = raw_rows.front().size();
    nn::AutoencoderSpec spec;
    spec.input_dim = dim;
    spec.hidden = config.hidden;
    spec.bottleneck = config.bottleneck;
    spec.validate();

    Rng init_rng = Rng::substream(config.seed, 11);
    Rng shuffle_rng = Rng::substream(config.seed, 13);
    detector.autoencoder_ = nn::Autoencoder(spec, init_rng);

    std::vector<std::vector<double>> rows;
    rows.reserve(raw_rows.size());
    for (const auto& r : raw_rows) rows.push_back(detector.standardizer_.transform(r));

    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    nn::Adam optimizer(detector.autoencoder_.parameters(), adam_cfg);

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        }
        epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<double> flat;
            flat.reserve((stop - start) * dim);
            for (std::size_t k = start; k < stop; ++k) {
                flat.insert(flat.end(), rows[order[k]].begin(), rows[order[k]].end());
            }
            Tensor x = Tensor::constant(std::move(flat), stop - start, dim);
            Tensor loss = mean_all(square(sub(detector.autoencoder_.forward(x), x)));
            const double loss_value = loss.item();
            if (!std::isfinite(loss_value)) {
                throw TrainingError("autoencoder diverged at epoch " + std::to_string(epoch));
            }
            optimizer.zero_grad();
            nn::backward(loss);
            optimizer.step();
            epoch_loss += loss_value;
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);
    }
    detector.final_loss_ = epoch_loss;
    return detector;
}

double AnomalyDetector::score(const kpi::KpiRecord& record) const {
    const auto row = standardizer_.transform(feature_label_row(record));
    Tensor x = Tensor::constant(std::vector<double>(row), 1, row.size());
    Tensor rec = autoencoder_.forward(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double d = rec.value()[j] - row[j];
        acc += d * d;
    }
    return acc;
}

std::vector<double> AnomalyDetector::scores(std::span<const kpi::KpiRecord> records) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(score(r));
    return out;
}

double tune_threshold(std::span<const double> scores, std::span<const int> labels,
                      double cost_fp, double cost_fn) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw ParameterError("tune_threshold: size mismatch or empty input");
    }
    std::int64_t positives = 0, negatives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw ParameterError("non-finite score");
        (labels[i] != 0 ? positives : negatives) += 1;
    }
    if (positives == 0 || negatives == 0) {
        throw ParameterError("tune_threshold needs both classes");
    }

    std::vector<std::pair<double, int>> order(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) order[i] = {scores[i], labels[i]};
    std::sort(order.begin(), order.end());

    // Sweep ascending candidates; below the minimum everything is flagged.
    double best_gamma = order.front().first - 1.0;
    double fp = static_cast<double>(negatives), fn = 0.0;
    double best_cost = cost_fp * fp + cost_fn * fn;

    std::size_t i = 0;
    while (i < order.size()) {
        // Records sharing a score cross the threshold together.
        const double s = order[i].first;
        while (i < order.size() && order[i].first == s) {
            if (order[i].second != 0) {
                fn += 1.0; // a positive drops below the threshold
            } else {
                fp -= 1.0; // a negative is no longer flagged
            }
            ++i;
        }
        const double gamma =
            i < order.size() ? 0.5 * (s + order[i].first) : order.back().first + 1.0;
        const double cost = cost_fp * fp + cost_fn * fn;
        if (cost < best_cost) {
            best_cost = cost;
            best_gamma = gamma;
        }
    }
    return best_gamma;
}

DetectFlag detect(const AnomalyDetector& detector, const kpi::KpiRecord& record,
                  double gamma) {
    return detector.score(record) > gamma ? DetectFlag::anomaly : DetectFlag::normal;
}

AnomalyReport evaluate_detector(const AnomalyDetector& detector,
                                std::span<const kpi::KpiRecord> records,
                                std::span<const int> labels, double gamma) {
    if (records.size() != labels.size()) throw ParameterError("labels size mismatch");
    AnomalyReport report;
    report.gamma = gamma;
    std::vector<int> flags;
    flags.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        AnomalyReport::Row row;
        row.timestamp = records[i].timestamp;
        row.cell_id = records[i].cell_id;
        row.score = detector.score(records[i]);
        row.flag = row.score > gamma ? 1 : 0;
        row.label = labels[i];
        flags.push_back(row.flag);
        report.rows.push_back(std::move(row));
    }
    report.confusion = confusion_counts(flags, labels);
    return report;
}

void AnomalyDetector::save(const std::filesystem::path& path) const {
    nlohmann::json cfg;
    cfg["hidden"] = config_.hidden;
    cfg["bottleneck"] = config_.bottleneck;
    cfg["seed"] = config_.seed;
    cfg["standardizer"] = standardizer_.to_json();
    std::vector<std::pair<std::string, Tensor>> named;
    for (std::size_t i = 0; i < autoencoder_.layers.size(); ++i) {
        named.emplace_back("layer" + std::to_string(i) + ".W", autoencoder_.layers[i].W);
        named.emplace_back("layer" + std::to_string(i) + ".b", autoencoder_.layers[i].b);
    }
    nn::save_checkpoint(path, "kpi-autoencoder", cfg, named);
}

AnomalyDetector AnomalyDetector::load(const std::filesystem::path& path) {
    const auto ckpt = nn::load_checkpoint(path);
    if (ckpt.model_kind != "kpi-autoencoder") {
        throw SchemaError("checkpoint is not an autoencoder: " + ckpt.model_kind);
    }
    AnomalyDetector detector;
    detector.config_.hidden = ckpt.config.at("hidden").get<std::vector<std::size_t>>();
    detector.config_.bottleneck = ckpt.config.at("bottleneck").get<std::size_t>();
    detector.config_.seed = ckpt.config.at("seed").get<std::uint64_t>();
    detector.standardizer_ = Standardizer::from_json(ckpt.config.at("standardizer"));
    for (std::size_t i = 0;; ++i) {
        const std::string w = "layer" + std::to_string(i) + ".W";
        const std::string b = "layer" + std::to_string(i) + ".b";
        if (!ckpt.params.count(w)) break;
        nn::Dense layer;
        layer.W = ckpt.params.at(w);
        layer.b = ckpt.params.at(b);
        detector.autoencoder_.layers.push_back(std::move(layer));
    }
    if (detector.autoencoder_.layers.empty()) {
        throw SchemaError("autoencoder checkpoint holds no layers");
    }
    return detector;
}

} // namespace pqoslat::pipe
