#include "pqoslat/pipe/metrics.hpp"

#include "pqoslat/errors.hpp"

namespace pqoslat::pipe {

double r2_score(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.size() != truths.size() || truths.empty()) {
        throw ParameterError("r2: size mismatch or empty input");
    }
    double mean = 0.0;
    for (double t : truths) mean += t;
    mean /= static_cast<double>(truths.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double r = truths[i] - predictions[i];
        const double d = truths[i] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) {
        throw ValidationError("r2 undefined: truths have zero variance");
    }
    return 1.0 - ss_res / ss_tot;
}

Confusion confusion_counts(std::span<const int> flags, std::span<const int> labels) {
    if (flags.size() != labels.size()) throw ParameterError("confusion: size mismatch");
    Confusion c;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (labels[i] != 0) {
            (flags[i] != 0 ? c.tp : c.fn) += 1;
        } else {
            (flags[i] != 0 ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double interval_coverage(std::span<const std::pair<double, double>> intervals,
                         std::span<const double> truths) {
    if (intervals.size() != truths.size() || truths.empty()) {
        throw ParameterError("coverage: size mismatch or empty input");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= intervals[i].first && truths[i] <= intervals[i].second) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truths.size());
}

} // namespace pqoslat::pipe
