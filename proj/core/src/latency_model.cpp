#include "pqoslat/latency_model.hpp"

#include <cmath>
#include <string>

#include "pqoslat/errors.hpp"

namespace pqoslat {

void LatencyModelParams::validate() const {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw ParameterError("lambda1 and lambda2 must be positive");
    }
    if (1.0 / lambda2 > 1.0 / lambda1) {
        throw ParameterError("retransmissions are prioritized: need 1/lambda2 <= 1/lambda1");
    }
    if (harq_delay_ms < 0.0) {
        throw ParameterError("HARQ delay must be nonnegative");
    }
    if (!(bler > 0.0 && bler < 1.0)) {
        throw ParameterError("bler must lie strictly in (0, 1)");
    }
    if (n_max < 1) {
        throw ParameterError("n_max must be at least 1");
    }
    if (order < 1 || order > n_max + 1) {
        throw ParameterError("order must lie in [1, n_max + 1]");
    }
    if (order > kMaxHypoexpStages) {
        throw ParameterError("order capped at " + std::to_string(kMaxHypoexpStages) +
                             " stages");
    }
}

std::vector<double> hypoexp_rates(const LatencyModelParams& params) {
    params.validate();
    const GeometricLaw law = params.retransmission_law();
    std::vector<double> rates;
    rates.reserve(params.order);
    rates.push_back(params.lambda1);
    for (int j = 1; j < params.order; ++j) {
        rates.push_back(params.lambda2 / (static_cast<double>(j) * law.pmf(j)));
    }
    // Distinctness is not guaranteed for pathological bler (j * P_j repeats a
    // value, e.g. bler = 0.5); surface that here rather than downstream.
    for (std::size_t i = 0; i < rates.size(); ++i) {
        for (std::size_t j = i + 1; j < rates.size(); ++j) {
            const double gap = std::abs(rates[i] - rates[j]);
            if (gap <= kDistinctRateTolerance * std::max(rates[i], rates[j])) {
                throw DegenerateRatesError(
                    "stage rates collide at bler=" + std::to_string(params.bler) +
                    ": " + std::to_string(rates[i]) + " vs " + std::to_string(rates[j]));
            }
        }
    }
    return rates;
}

ContinuousDistribution analytic_latency(const LatencyModelParams& params) {
    const std::vector<double> rates = hypoexp_rates(params);
    const GeometricLaw law = params.retransmission_law();
    // The HARQ constants of the same weighted-sum expansion: C for the first
    // transmission plus j*C weighted by P_j per retransmission stage.
    double weighted_retx = 0.0;
    for (int j = 1; j < params.order; ++j) {
        weighted_retx += static_cast<double>(j) * law.pmf(j);
    }
    const double offset = params.harq_delay_ms * (1.0 + weighted_retx);
    ContinuousDistribution base = make_hypoexponential(rates);
    return offset > 0.0 ? base.shifted_by(offset) : base;
}

double exact_mean(const LatencyModelParams& params) {
    params.validate();
    const double mean_retx_count = params.retransmission_law().mean();
    return (1.0 / params.lambda1 + params.harq_delay_ms) +
           mean_retx_count * (1.0 / params.lambda2 + params.harq_delay_ms);
}

double sample_exact(const LatencyModelParams& params, LatencySampleMode mode, Rng& rng) {
    params.validate();
    const int n = params.retransmission_law().sample(rng);
    double total = params.harq_delay_ms + rng.exponential(params.lambda1);
    if (n == 0) return total;
    if (mode == LatencySampleMode::scaled) {
        total += n * (params.harq_delay_ms + rng.exponential(params.lambda2));
    } else {
        for (int k = 0; k < n; ++k) {
            total += params.harq_delay_ms + rng.exponential(params.lambda2);
        }
    }
    return total;
}

double appendix_b_pdf(double lambda1, double lambda2, double p1, double t) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw ParameterError("rates must be positive");
    }
    if (!(p1 > 0.0 && p1 <= 1.0)) {
        throw ParameterError("p1 must lie in (0, 1]");
    }
    const double l2p = lambda2 / p1;
    if (std::abs(l2p - lambda1) <= kDistinctRateTolerance * std::max(l2p, lambda1)) {
        throw DegenerateRatesError("lambda1 equals lambda2/p1");
    }
    if (t < 0.0) return 0.0;
    return lambda1 * l2p / (l2p - lambda1) * (std::exp(-lambda1 * t) - std::exp(-l2p * t));
}

} // namespace pqoslat
