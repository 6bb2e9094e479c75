#pragma once

#include <vector>

#include "pqoslat/distributions.hpp"
#include "pqoslat/rng.hpp"

namespace pqoslat {

/// Parameters of the analytic downlink U-plane latency law.
///
/// The first transmission of a packet takes exp(lambda1) radio time plus a
/// fixed HARQ delay C; each of the N retransmissions takes exp(lambda2) plus
/// C, where N is geometric with success probability 1 - bler, truncated to
/// {0, ..., n_max}. Retransmissions are prioritized, so 1/lambda2 <= 1/lambda1.
struct LatencyModelParams {
    double lambda1 = 1.0;     // 1/ms, rate of the first-transmission radio time
    double lambda2 = 2.0;     // 1/ms, rate of a retransmission radio time
    double harq_delay_ms = 0.0; // C
    double bler = 0.1;        // per-attempt failure probability, in (0, 1)
    int n_max = 8;            // retransmission cap
    int order = 4;            // approximation stages n, 1 <= n <= min(n_max+1, 6)

    void validate() const;
    GeometricLaw retransmission_law() const { return {1.0 - bler, n_max}; }
};

/// How the retransmission term of the latency sum is drawn.
/// `scaled` multiplies a single retransmission draw by N (the literal reading
/// of the sum); `iid_sum` adds N independent draws (each retransmission is an
/// independent scheduling event). Both have the same mean.
enum class LatencySampleMode { scaled, iid_sum };

/// Stage rates of the order-n hypoexponential approximation:
/// [lambda1, lambda2/(1*P_1), lambda2/(2*P_2), ...], length `order`.
/// Throws DegenerateRatesError when two stage rates collide (pathological
/// bler values such as 0.5).
std::vector<double> hypoexp_rates(const LatencyModelParams& params);

/// The order-n analytic law: hypoexponential over hypoexp_rates, shifted by
/// the HARQ constant C * (1 + sum_j j*P_j) accumulated over the same stages.
ContinuousDistribution analytic_latency(const LatencyModelParams& params);

/// Exact mean of the latency sum: (1/lambda1 + C) + E[N] * (1/lambda2 + C)
/// with E[N] the truncated-geometric mean. Oracle for the order convergence
/// of analytic_latency.
double exact_mean(const LatencyModelParams& params);

/// One exact Monte-Carlo draw of the latency sum (not the hypoexponential
/// approximation).
double sample_exact(const LatencyModelParams& params, LatencySampleMode mode, Rng& rng);

/// Closed-form 2-stage pdf: lambda1 * l2' / (l2' - lambda1) *
/// (exp(-lambda1 t) - exp(-l2' t)) with l2' = lambda2 / p1. Must agree with
/// make_hypoexponential({lambda1, lambda2/p1}).pdf(t).
double appendix_b_pdf(double lambda1, double lambda2, double p1, double t);

} // namespace pqoslat
