#include <doctest.h>

#include <cmath>
#include <vector>

#include "pqoslat/distributions.hpp"
#include "pqoslat/errors.hpp"
#include "pqoslat/rng.hpp"

using namespace pqoslat;

namespace {

// Trapezoid integral of the pdf, used for the normalization property.
double integrate_pdf(const ContinuousDistribution& d, double hi, int n = 200000) {
    const double h = hi / n;
    double acc = 0.5 * (d.pdf(0.0) + d.pdf(hi));
    for (int k = 1; k < n; ++k) acc += d.pdf(k * h);
    return acc * h;
}

} // namespace

TEST_CASE("exponential basics") {
    const auto d = make_exponential(2.0);
    CHECK(d.mean() == doctest::Approx(0.5));
    CHECK(d.kind() == ContinuousDistribution::Kind::exponential);

    const auto unit = make_exponential(1.0);
    CHECK(unit.cdf(0.0) == 0.0);
    CHECK(unit.pdf(1.0) == doctest::Approx(0.3678794).epsilon(1e-6));
    CHECK(unit.pdf(-0.5) == 0.0);

    CHECK_THROWS_AS(make_exponential(0.0), ParameterError);
    CHECK_THROWS_AS(make_exponential(-1.0), ParameterError);
}

TEST_CASE("hypoexponential closed form") {
    const auto d = make_hypoexponential({1.0, 2.0});
    CHECK(d.mean() == doctest::Approx(1.5));
    CHECK(d.pdf(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    // Frozen from the numeric convolution oracle below: 2(e^-1 - e^-2).
    CHECK(d.pdf(1.0) == doctest::Approx(0.4650883).epsilon(1e-6));

    // Rate order must not matter.
    const auto swapped = make_hypoexponential({2.0, 1.0});
    CHECK(swapped.pdf(0.7) == doctest::Approx(d.pdf(0.7)).epsilon(1e-12));
}

TEST_CASE("hypoexponential rejects degenerate and invalid rates") {
    CHECK_THROWS_AS(make_hypoexponential({1.0, 1.0 + 1e-12}), DegenerateRatesError);
    CHECK_THROWS_AS(make_hypoexponential({}), ParameterError);
    CHECK_THROWS_AS(make_hypoexponential({1.0, -2.0}), ParameterError);
    CHECK_THROWS_AS(make_hypoexponential({1, 2, 3, 4, 5, 6, 7}), ParameterError);
    CHECK_NOTHROW(make_hypoexponential({1, 2, 3, 4, 5, 6}));
}

TEST_CASE("numeric convolution oracle matches the 2-stage closed form") {
    const auto a = make_exponential(1.0);
    const auto b = make_exponential(2.0);
    ConvolutionGrid grid;
    grid.tolerance = 2.5e-7;
    CHECK(numeric_convolution(a, b, 1.0, grid) == doctest::Approx(0.4650883).epsilon(1e-6));
    CHECK(numeric_convolution(a, b, 0.0, grid) == 0.0);

    // 20 random rate pairs, 100 points each, against the library pdf.
    Rng rng(7);
    for (int pair = 0; pair < 20; ++pair) {
        const double r1 = rng.uniform(0.2, 4.0);
        double r2 = rng.uniform(0.2, 4.0);
        if (std::abs(r1 - r2) < 1e-3) r2 += 0.1;
        const auto closed = make_hypoexponential({r1, r2});
        const auto ea = make_exponential(r1);
        const auto eb = make_exponential(r2);
        const double hi = closed.quantile(0.995);
        for (int k = 1; k <= 100; ++k) {
            const double t = hi * k / 100.0;
            const double brute = numeric_convolution(ea, eb, t, grid);
            CHECK(std::abs(brute - closed.pdf(t)) < 1e-6);
        }
    }
}

TEST_CASE("near-equal rates approach the Erlang-2 limit through the oracle") {
    const auto a = make_exponential(1.0);
    const auto b = make_exponential(1.0 + 1e-12);
    ConvolutionGrid grid;
    grid.tolerance = 1e-7;
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        CHECK(numeric_convolution(a, b, t, grid) ==
              doctest::Approx(t * std::exp(-t)).epsilon(1e-5));
    }
}

TEST_CASE("convolution flags insufficient resolution") {
    ConvolutionGrid grid;
    grid.initial_points = 2;
    grid.max_refinements = 1;
    grid.tolerance = 1e-12;
    const auto a = make_exponential(1.0);
    const auto b = make_exponential(5.0);
    CHECK_THROWS_AS(numeric_convolution(a, b, 3.0, grid), NumericError);
}

TEST_CASE("normalization and quantile inversion properties") {
    Rng rng(11);
    std::vector<ContinuousDistribution> laws;
    laws.push_back(make_exponential(0.7));
    laws.push_back(make_hypoexponential({1.0, 2.0}));
    laws.push_back(make_hypoexponential({0.4, 1.3, 5.0}));
    laws.push_back(make_hypoexponential({2.0, 3.0, 5.5, 9.0}).shifted_by(1.25));
    for (const auto& d : laws) {
        const double hi = d.quantile(1.0 - 1e-9);
        const double mass = integrate_pdf(d, hi);
        CHECK(mass > 1.0 - 1e-5);
        CHECK(mass <= 1.0 + 1e-7);
        for (int k = 1; k <= 1000; ++k) {
            const double u = k / 1001.0;
            CHECK(std::abs(d.cdf(d.quantile(u)) - u) < 1e-8);
        }
    }
}

TEST_CASE("shifted law places no mass below its offset") {
    const auto d = make_exponential(1.0).shifted_by(2.0);
    CHECK(d.kind() == ContinuousDistribution::Kind::shifted);
    CHECK(d.pdf(1.999) == 0.0);
    CHECK(d.cdf(2.0) == 0.0);
    CHECK(d.mean() == doctest::Approx(3.0));
    CHECK_THROWS_AS(d.shifted_by(-1.0), ParameterError);
}

TEST_CASE("geometric pmf and truncation") {
    const GeometricLaw untruncated{0.9, 1000};
    CHECK(untruncated.pmf(1) == doctest::Approx(0.09).epsilon(1e-12));

    const GeometricLaw certain{1.0, 5};
    CHECK(certain.pmf(0) == 1.0);
    CHECK(certain.pmf(3) == 0.0);

    const GeometricLaw truncated{0.9, 2};
    CHECK(geometric_pmf(truncated, 2) == doctest::Approx(0.009 / 0.999).epsilon(1e-12));
    CHECK_THROWS_AS(truncated.pmf(3), ParameterError);
    CHECK_THROWS_AS(truncated.pmf(-1), ParameterError);

    // pmf sums to one after renormalization.
    double total = 0.0;
    for (int j = 0; j <= truncated.n_max; ++j) total += truncated.pmf(j);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    // Truncated mean: p=0.5, n_max=1 -> P1/(P0+P1) = 1/3.
    const GeometricLaw half{0.5, 1};
    CHECK(half.mean() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sampling matches analytic moments") {
    const int n = 1000000;

    Rng rng(42);
    const auto ex = make_exponential(1.5);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += ex.sample(rng);
    const double exp_bound = 3.0 * (1.0 / 1.5) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(acc / n - 1.0 / 1.5) < exp_bound);

    const auto hypo = make_hypoexponential({1.0, 2.0});
    acc = 0.0;
    for (int i = 0; i < n; ++i) acc += hypo.sample(rng);
    const double sigma = std::sqrt(1.0 + 0.25);
    CHECK(std::abs(acc / n - 1.5) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));

    const GeometricLaw certain{1.0, 8};
    for (int i = 0; i < 100; ++i) CHECK(certain.sample(rng) == 0);

    // Empirical pmf of a truncated geometric stays close to the analytic one.
    const GeometricLaw law{0.75, 3};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) ++counts[law.sample(rng)];
    for (int j = 0; j <= 3; ++j) {
        CHECK(static_cast<double>(counts[j]) / n ==
              doctest::Approx(law.pmf(j)).epsilon(0.02));
    }
}

TEST_CASE("identical seeds produce bit-identical streams") {
    Rng a(123), b(123);
    for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng s1 = Rng::substream(9, 4);
    Rng s2 = Rng::substream(9, 4);
    Rng s3 = Rng::substream(9, 5);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = s1.next_u64();
        all_equal = all_equal && (x == s2.next_u64());
        any_diff = any_diff || (x != s3.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}
