#pragma once

#include <span>
#include <vector>

#include "pqoslat/distributions.hpp"

namespace pqoslat {

/// Kolmogorov-Smirnov statistic between a sample and a continuous law.
double ks_statistic(std::span<const double> samples, const ContinuousDistribution& dist);

/// Two one-dimensional samples variant (used for self-comparisons in tests).
double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b);

/// 1-Wasserstein distance between the empirical cdf of `samples` and `dist`,
/// integrated on a fine grid spanning both supports.
double wasserstein1(std::span<const double> samples, const ContinuousDistribution& dist);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    double density = 0.0;      // count / (n * width)
    double reference_pdf = 0.0; // analytic pdf at the bin center, when given
};

/// Fixed-width histogram over [0, max sample]; when `reference` is non-null
/// its pdf is evaluated at bin centers.
std::vector<HistogramBin> histogram_density(std::span<const double> samples,
                                            double bin_width,
                                            const ContinuousDistribution* reference = nullptr);

/// Pearson correlation; throws ParameterError for size < 3 or mismatched
/// lengths and ValidationError when either side has zero variance.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Lag-k autocorrelation of a series (biased normalization).
double autocorrelation(std::span<const double> series, std::size_t lag);

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

} // namespace pqoslat
