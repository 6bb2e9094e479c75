#include "pqoslat/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pqoslat/errors.hpp"

namespace pqoslat {

namespace {

void check_rates(const std::vector<double>& rates) {
    if (rates.empty()) {
        throw ParameterError("distribution needs at least one rate");
    }
    if (static_cast<int>(rates.size()) > kMaxHypoexpStages) {
        throw ParameterError("hypoexponential capped at " +
                             std::to_string(kMaxHypoexpStages) + " stages, got " +
                             std::to_string(rates.size()));
    }
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ParameterError("rates must be strictly positive");
        }
    }
}

// Rates assumed sorted ascending.
void check_distinct(const std::vector<double>& rates) {
    for (std::size_t i = 1; i < rates.size(); ++i) {
        const double gap = rates[i] - rates[i - 1];
        if (gap <= kDistinctRateTolerance * rates[i]) {
            throw DegenerateRatesError(
                "hypoexponential rates too close: " + std::to_string(rates[i - 1]) +
                " vs " + std::to_string(rates[i]));
        }
    }
}

// w_i = prod_{j != i} lambda_j / (lambda_j - lambda_i), accumulated in
// extended precision; the terms alternate sign once rates are sorted.
std::vector<long double> hypoexp_weights(const std::vector<double>& rates) {
    const std::size_t n = rates.size();
    std::vector<long double> w(n, 1.0L);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const long double lj = rates[j];
            const long double li = rates[i];
            w[i] *= lj / (lj - li);
        }
    }
    return w;
}

} // namespace

ContinuousDistribution make_exponential(double rate) {
    check_rates({rate});
    ContinuousDistribution d;
    d.rates_ = {rate};
    d.weights_ = {1.0L};
    return d;
}

ContinuousDistribution make_hypoexponential(std::vector<double> rates) {
    check_rates(rates);
    std::sort(rates.begin(), rates.end());
    check_distinct(rates);
    ContinuousDistribution d;
    d.weights_ = hypoexp_weights(rates);
    d.rates_ = std::move(rates);
    return d;
}

ContinuousDistribution ContinuousDistribution::shifted_by(double offset_ms) const {
    if (offset_ms < 0.0 || !std::isfinite(offset_ms)) {
        throw ParameterError("shift offset must be nonnegative");
    }
    ContinuousDistribution d = *this;
    d.offset_ += offset_ms;
    return d;
}

double ContinuousDistribution::pdf(double t) const {
    const double x = t - offset_;
    if (x < 0.0) return 0.0;
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        acc += weights_[i] * static_cast<long double>(rates_[i]) *
               std::exp(static_cast<long double>(-rates_[i] * x));
    }
    // Cancellation can leave a tiny negative residue near the origin.
    return std::max(0.0, static_cast<double>(acc));
}

double ContinuousDistribution::cdf(double t) const {
    const double x = t - offset_;
    if (x <= 0.0) return 0.0;
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        acc += weights_[i] * std::exp(static_cast<long double>(-rates_[i] * x));
    }
    const double f = 1.0 - static_cast<double>(acc);
    return std::min(1.0, std::max(0.0, f));
}

double ContinuousDistribution::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) {
        throw ParameterError("quantile argument must lie in (0, 1)");
    }
    if (rates_.size() == 1) {
        return offset_ - std::log1p(-u) / rates_[0];
    }
    // Bracket then bisect; cdf is monotone and continuous.
    double lo = offset_;
    double hi = offset_ + mean() - offset_; // crude start: one mean above offset
    hi = std::max(hi, offset_ + 1e-12);
    int guard = 0;
    while (cdf(hi) < u) {
        hi = offset_ + 2.0 * (hi - offset_);
        if (++guard > 200) throw NumericError("quantile bracket failed to expand");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double ContinuousDistribution::mean() const {
    double m = offset_;
    for (double r : rates_) m += 1.0 / r;
    return m;
}

double ContinuousDistribution::variance() const {
    double v = 0.0;
    for (double r : rates_) v += 1.0 / (r * r);
    return v;
}

double ContinuousDistribution::sample(Rng& rng) const {
    double x = offset_;
    for (double r : rates_) x += rng.exponential(r);
    return x;
}

void GeometricLaw::validate() const {
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
        throw ParameterError("geometric success probability must lie in (0, 1]");
    }
    if (n_max < 0) {
        throw ParameterError("geometric truncation must be nonnegative");
    }
}

namespace {

// P(N <= n_max) before renormalization: 1 - (1-p)^(n_max+1).
double truncation_mass(double p, int n_max) {
    if (p >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n_max + 1) * std::log1p(-p));
}

} // namespace

double GeometricLaw::pmf(int j) const {
    validate();
    if (j < 0 || j > n_max) {
        throw ParameterError("geometric pmf index " + std::to_string(j) +
                             " outside [0, " + std::to_string(n_max) + "]");
    }
    if (success_prob >= 1.0) return j == 0 ? 1.0 : 0.0;
    const double q = 1.0 - success_prob;
    return std::pow(q, j) * success_prob / truncation_mass(success_prob, n_max);
}

double GeometricLaw::cdf(int j) const {
    validate();
    if (j < 0) return 0.0;
    if (j >= n_max) return 1.0;
    if (success_prob >= 1.0) return 1.0;
    const double num = -std::expm1(static_cast<double>(j + 1) * std::log1p(-success_prob));
    return num / truncation_mass(success_prob, n_max);
}

double GeometricLaw::mean() const {
    validate();
    if (success_prob >= 1.0) return 0.0;
    const double p = success_prob;
    const double q = 1.0 - p;
    const double m = static_cast<double>(n_max);
    const double qm = std::exp(m * std::log(q));          // q^m
    const double qm1 = qm * q;                            // q^(m+1)
    // sum_{j=0}^{m} j q^j = q (1 - (m+1) q^m + m q^(m+1)) / (1-q)^2
    const double s = q * (1.0 - (m + 1.0) * qm + m * qm1) / (p * p);
    return s * p / truncation_mass(p, n_max);
}

int GeometricLaw::sample(Rng& rng) const {
    validate();
    if (success_prob >= 1.0) return 0;
    const double q = 1.0 - success_prob;
    // Inverse transform on the truncated law: rescale u by the truncated mass.
    const double u = rng.uniform() * truncation_mass(success_prob, n_max);
    const int j = static_cast<int>(std::floor(std::log1p(-u) / std::log(q)));
    return std::clamp(j, 0, n_max);
}

double geometric_pmf(const GeometricLaw& law, int j) {
    return law.pmf(j);
}

namespace {

double trapezoid_convolution(const ContinuousDistribution& a,
                             const ContinuousDistribution& b,
                             double t, int n) {
    const double h = t / n;
    long double acc = 0.5L * (static_cast<long double>(a.pdf(0.0)) * b.pdf(t) +
                              static_cast<long double>(a.pdf(t)) * b.pdf(0.0));
    for (int k = 1; k < n; ++k) {
        const double tau = k * h;
        acc += static_cast<long double>(a.pdf(tau)) * b.pdf(t - tau);
    }
    return static_cast<double>(acc * h);
}

} // namespace

double numeric_convolution(const ContinuousDistribution& a,
                           const ContinuousDistribution& b,
                           double t,
                           const ConvolutionGrid& grid) {
    if (t < 0.0) throw ParameterError("convolution evaluation point must be >= 0");
    if (grid.initial_points < 2) throw ParameterError("grid needs at least 2 points");
    if (t == 0.0) return 0.0;

    int n = grid.initial_points;
    double prev = trapezoid_convolution(a, b, t, n);
    for (int r = 0; r < grid.max_refinements; ++r) {
        n *= 2;
        const double cur = trapezoid_convolution(a, b, t, n);
        if (std::abs(cur - prev) <= grid.tolerance) {
            return cur;
        }
        prev = cur;
    }
    throw NumericError("convolution grid did not converge to tolerance");
}

} // namespace pqoslat
