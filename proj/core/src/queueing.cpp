#include "pqoslat/queueing.hpp"

#include <cmath>

#include "pqoslat/errors.hpp"

namespace pqoslat {

void MM1Params::validate() const {
    if (!(arrival_rate > 0.0) || !(service_rate > 0.0)) {
        throw ParameterError("arrival and service rates must be positive");
    }
    if (!(utilization() < 1.0)) {
        throw InstabilityError("M/M/1 utilization must be strictly below 1, got rho=" +
                               std::to_string(utilization()));
    }
}

ContinuousDistribution mm1_sojourn(const MM1Params& params) {
    params.validate();
    return make_exponential(params.service_rate * (1.0 - params.utilization()));
}

double sojourn_lst(double s, const MM1Params& params) {
    params.validate();
    if (s < 0.0) throw ParameterError("LST argument must be nonnegative");
    if (s == 0.0) return 1.0; // total mass
    const double mu = params.service_rate;
    const double beta = params.arrival_rate;
    const double rho = params.utilization();
    const double btilde = mu / (mu + s);
    // Denominator grouped as beta*(B~ - 1) + s to avoid cancellation at small s.
    const double denom = beta * (btilde - 1.0) + s;
    return (1.0 - rho) * btilde * s / denom;
}

} // namespace pqoslat
