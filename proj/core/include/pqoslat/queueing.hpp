#pragma once

#include "pqoslat/distributions.hpp"

namespace pqoslat {

/// M/M/1 queue parameters: Poisson arrivals at `arrival_rate` (1/ms),
/// exponential service at `service_rate` (1/ms). Stability requires
/// utilization strictly below one.
struct MM1Params {
    double arrival_rate = 0.0; // beta
    double service_rate = 1.0; // mu

    double utilization() const { return arrival_rate / service_rate; }
    /// Throws InstabilityError when utilization >= 1, ParameterError for
    /// nonpositive rates.
    void validate() const;
};

/// Sojourn (waiting + service) law of a stable M/M/1 queue:
/// exponential with rate mu * (1 - rho).
ContinuousDistribution mm1_sojourn(const MM1Params& params);

/// Laplace-Stieltjes transform of the sojourn time, evaluated through the
/// Pollaczek-Khinchine formula with the M/M/1 service transform
/// B~(s) = mu / (mu + s). Equals mu(1-rho) / (mu(1-rho) + s) analytically.
double sojourn_lst(double s, const MM1Params& params);

} // namespace pqoslat
