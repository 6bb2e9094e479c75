#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace pqoslat::pipe {

/// Coefficient of determination 1 - SS_res / SS_tot. Throws ValidationError
/// when the truths have zero variance.
double r2_score(std::span<const double> predictions, std::span<const double> truths);

struct Confusion {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    double precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0; }
    double recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0; }
};

/// flags/labels: 1 = anomaly, 0 = normal.
Confusion confusion_counts(std::span<const int> flags, std::span<const int> labels);

/// Fraction of truths inside their [lo, hi] interval.
double interval_coverage(std::span<const std::pair<double, double>> intervals,
                         std::span<const double> truths);

} // namespace pqoslat::pipe
