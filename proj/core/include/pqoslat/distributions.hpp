#pragma once

#include <vector>

#include "pqoslat/rng.hpp"

namespace pqoslat {

/// Relative gap below which two hypoexponential rates are considered equal.
/// Near-equal rates are rejected rather than silently switched to an Erlang
/// form; callers must perturb or reduce the order.
inline constexpr double kDistinctRateTolerance = 1e-9;

/// Maximum number of hypoexponential stages. The alternating-sign weight
/// formula is ill-conditioned for close rates; the cap keeps cancellation
/// bounded.
inline constexpr int kMaxHypoexpStages = 6;

/// Continuous law on [offset, inf): exponential, hypoexponential (sum of
/// independent exponentials with pairwise distinct rates), or either of the
/// two shifted right by a constant offset.
///
/// Rates are in 1/ms, times in ms throughout.
class ContinuousDistribution {
public:
    enum class Kind { exponential, hypoexponential, shifted };

    Kind kind() const {
        if (offset_ != 0.0) return Kind::shifted;
        return rates_.size() == 1 ? Kind::exponential : Kind::hypoexponential;
    }

    const std::vector<double>& rates() const { return rates_; }
    double offset() const { return offset_; }

    double pdf(double t) const;
    double cdf(double t) const;
    /// Inverse cdf; u must lie in (0, 1).
    double quantile(double u) const;
    double mean() const;
    double variance() const;

    /// Stage-wise inverse-transform sample.
    double sample(Rng& rng) const;

    /// Same law shifted right by `offset_ms` (must be nonnegative).
    ContinuousDistribution shifted_by(double offset_ms) const;

    friend ContinuousDistribution make_exponential(double rate);
    friend ContinuousDistribution make_hypoexponential(std::vector<double> rates);

private:
    ContinuousDistribution() = default;

    std::vector<double> rates_;            // sorted ascending
    std::vector<long double> weights_;     // alternating-sign mixture weights
    double offset_ = 0.0;
};

/// Exponential(rate). Throws ParameterError for rate <= 0.
ContinuousDistribution make_exponential(double rate);

/// Hypoexponential with the given rates (any order; sorted internally).
/// Throws ParameterError for empty/too long input or nonpositive rates and
/// DegenerateRatesError when two rates fall within kDistinctRateTolerance.
ContinuousDistribution make_hypoexponential(std::vector<double> rates);

/// Geometric retransmission-count law truncated to {0, ..., n_max} and
/// renormalized: pmf(j) proportional to (1-p)^j * p.
struct GeometricLaw {
    double success_prob = 1.0; // p in (0, 1]
    int n_max = 0;             // truncation point, >= 0

    void validate() const;
    /// Renormalized pmf at j; throws ParameterError for j outside [0, n_max].
    double pmf(int j) const;
    double cdf(int j) const;
    /// Truncated mean E[N].
    double mean() const;
    int sample(Rng& rng) const;
};

double geometric_pmf(const GeometricLaw& law, int j);

/// Trapezoidal-grid resolution spec for numeric_convolution. Refinement
/// doubles the point count until two successive estimates agree to
/// `tolerance`, starting at `initial_points` and giving up after
/// `max_refinements` doublings.
struct ConvolutionGrid {
    int initial_points = 256;
    double tolerance = 1e-6;
    int max_refinements = 14;
};

/// Brute-force density of the sum of two independent nonnegative variables,
/// evaluated at t: trapezoidal approximation of the convolution integral.
/// Throws NumericError when successive refinements still differ by more than
/// the grid tolerance.
double numeric_convolution(const ContinuousDistribution& a,
                           const ContinuousDistribution& b,
                           double t,
                           const ConvolutionGrid& grid = {});

} // namespace pqoslat
