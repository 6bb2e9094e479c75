#include "pqoslat/stats.hpp"

#include <algorithm>
#include <cmath>

#include "pqoslat/errors.hpp"

namespace pqoslat {

double ks_statistic(std::span<const double> samples, const ContinuousDistribution& dist) {
    if (samples.empty()) throw SampleSizeError("KS needs at least one sample");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = dist.cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return d;
}

double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw SampleSizeError("KS needs nonempty samples");
    std::vector<double> xa(a.begin(), a.end());
    std::vector<double> xb(b.begin(), b.end());
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] <= x) ++i;
        while (j < xb.size() && xb[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / xa.size() -
                                 static_cast<double>(j) / xb.size()));
    }
    return d;
}

double wasserstein1(std::span<const double> samples, const ContinuousDistribution& dist) {
    if (samples.empty()) throw SampleSizeError("Wasserstein needs samples");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double hi = std::max(xs.back(), dist.quantile(1.0 - 1e-7));
    const double lo = std::min(0.0, xs.front());
    const int grid = 20000;
    const double h = (hi - lo) / grid;
    const double n = static_cast<double>(xs.size());
    double acc = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k <= grid; ++k) {
        const double t = lo + k * h;
        while (idx < xs.size() && xs[idx] <= t) ++idx;
        const double femp = static_cast<double>(idx) / n;
        const double gap = std::abs(femp - dist.cdf(t));
        acc += (k == 0 || k == grid) ? 0.5 * gap : gap;
    }
    return acc * h;
}

std::vector<HistogramBin> histogram_density(std::span<const double> samples,
                                            double bin_width,
                                            const ContinuousDistribution* reference) {
    if (samples.empty()) throw SampleSizeError("histogram needs samples");
    if (!(bin_width > 0.0)) throw ParameterError("bin width must be positive");
    const double hi = *std::max_element(samples.begin(), samples.end());
    const std::size_t n_bins = static_cast<std::size_t>(std::floor(hi / bin_width)) + 1;
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].left = b * bin_width;
        bins[b].right = (b + 1) * bin_width;
    }
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bin_width);
    for (double x : samples) {
        std::size_t b = static_cast<std::size_t>(std::floor(x / bin_width));
        if (b >= n_bins) b = n_bins - 1;
        bins[b].density += norm;
    }
    if (reference != nullptr) {
        for (auto& bin : bins) {
            bin.reference_pdf = reference->pdf(0.5 * (bin.left + bin.right));
        }
    }
    return bins;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("pearson: length mismatch");
    if (x.size() < 3) throw ParameterError("pearson: need at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValidationError("pearson: zero variance makes the correlation undefined");
    }
    return sxy / std::sqrt(sxx * syy);
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
    if (series.size() <= lag + 1) throw ParameterError("series too short for lag");
    const double mean = sample_mean(series);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double d = series[i] - mean;
        den += d * d;
        if (i + lag < series.size()) {
            num += d * (series[i + lag] - mean);
        }
    }
    if (den == 0.0) throw ValidationError("autocorrelation of a constant series");
    return num / den;
}

double sample_mean(std::span<const double> xs) {
    if (xs.empty()) throw SampleSizeError("mean of empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw SampleSizeError("variance needs two samples");
    const double m = sample_mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

} // namespace pqoslat
