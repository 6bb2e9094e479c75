#include <doctest.h>

#include <cmath>

#include "pqoslat/errors.hpp"
#include "pqoslat/queueing.hpp"
#include "pqoslat/rng.hpp"

using namespace pqoslat;

TEST_CASE("sojourn law is exponential with rate mu(1-rho)") {
    const auto d = mm1_sojourn({0.5, 1.0});
    CHECK(d.kind() == ContinuousDistribution::Kind::exponential);
    CHECK(d.rates()[0] == doctest::Approx(0.5));

    CHECK(mm1_sojourn({1e-9, 1.0}).rates()[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mm1_sojourn({0.9, 1.0}).mean() == doctest::Approx(10.0));

    CHECK_THROWS_AS(mm1_sojourn({1.0, 1.0}), InstabilityError);
    CHECK_THROWS_AS(mm1_sojourn({2.0, 1.0}), InstabilityError);
    CHECK_THROWS_AS(mm1_sojourn({-1.0, 1.0}), ParameterError);
}

TEST_CASE("sojourn LST through the Pollaczek-Khinchine route") {
    CHECK(sojourn_lst(0.0, {0.5, 1.0}) == 1.0);
    CHECK(sojourn_lst(0.5, {0.5, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sojourn_lst(0.1, {0.9, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(sojourn_lst(-0.1, {0.5, 1.0}), ParameterError);
}

TEST_CASE("LST equals the simplified exponential transform on random triples") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const double mu = rng.uniform(0.5, 3.0);
        const double rho = rng.uniform(0.05, 0.9);
        const double s = rng.uniform(0.01, 10.0);
        const MM1Params params{rho * mu, mu};
        const double via_pk = sojourn_lst(s, params);
        const double rate = mu * (1.0 - rho);
        const double simplified = rate / (rate + s);
        CHECK(std::abs(via_pk - simplified) <= 1e-12 * simplified);
    }
}
