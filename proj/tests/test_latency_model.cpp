#include <doctest.h>

#include <cmath>
#include <vector>

#include "pqoslat/errors.hpp"
#include "pqoslat/latency_model.hpp"
#include "pqoslat/stats.hpp"

using namespace pqoslat;

namespace {

LatencyModelParams base_params() {
    LatencyModelParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 2.0;
    p.harq_delay_ms = 0.0;
    p.bler = 0.1;
    p.n_max = 50; // effectively untruncated for bler <= 0.3
    p.order = 3;
    return p;
}

} // namespace

TEST_CASE("stage rates follow the weighted expansion coefficients") {
    auto p = base_params();
    p.order = 1;
    CHECK(hypoexp_rates(p) == std::vector<double>{1.0});

    p.order = 2;
    auto rates = hypoexp_rates(p);
    REQUIRE(rates.size() == 2);
    CHECK(rates[0] == doctest::Approx(1.0));
    CHECK(rates[1] == doctest::Approx(22.2222).epsilon(1e-4)); // 2/(1*0.09)

    p.order = 3;
    rates = hypoexp_rates(p);
    REQUIRE(rates.size() == 3);
    CHECK(rates[2] == doctest::Approx(111.1111).epsilon(1e-4)); // 2/(2*0.009)
}

TEST_CASE("pathological bler collides stage rates") {
    auto p = base_params();
    p.bler = 0.5; // 1*P_1 == 2*P_2 exactly
    p.order = 3;
    CHECK_THROWS_AS(hypoexp_rates(p), DegenerateRatesError);
}

TEST_CASE("parameter validation") {
    auto p = base_params();
    p.lambda2 = 0.5; // slower retransmissions than first transmissions
    CHECK_THROWS_AS(p.validate(), ParameterError);

    p = base_params();
    p.order = 0;
    CHECK_THROWS_AS(p.validate(), ParameterError);

    p = base_params();
    p.bler = 0.0;
    CHECK_THROWS_AS(p.validate(), ParameterError);

    p = base_params();
    p.n_max = 2;
    p.order = 4; // order may not exceed n_max + 1
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("analytic law degenerates correctly at order 1") {
    auto p = base_params();
    p.order = 1;
    const auto d = analytic_latency(p);
    CHECK(d.kind() == ContinuousDistribution::Kind::exponential);
    CHECK(d.rates()[0] == doctest::Approx(1.0));

    p.harq_delay_ms = 1.0;
    const auto shifted = analytic_latency(p);
    CHECK(shifted.offset() == doctest::Approx(1.0));
    CHECK(shifted.pdf(0.5) == 0.0);
}

TEST_CASE("exact mean closed form") {
    auto p = base_params();
    p.bler = 1e-12;
    p.harq_delay_ms = 0.25;
    CHECK(exact_mean(p) == doctest::Approx(1.25).epsilon(1e-9));

    p = base_params();
    p.lambda2 = 2.0;
    p.harq_delay_ms = 0.5;
    CHECK(exact_mean(p) == doctest::Approx(1.5 + (1.0 / 9.0) * 1.0).epsilon(1e-6));

    p = base_params();
    p.bler = 0.5;
    p.n_max = 1;
    p.order = 1;
    CHECK(exact_mean(p) == doctest::Approx(1.0 + (1.0 / 3.0) * 0.5).epsilon(1e-12));
}

TEST_CASE("order convergence of the analytic mean") {
    for (double bler : {0.05, 0.1, 0.2}) {
        auto p = base_params();
        p.bler = bler;
        const double target = exact_mean(p);
        double prev = 0.0;
        for (int order = 1; order <= 4; ++order) {
            p.order = order;
            const double m = analytic_latency(p).mean();
            CHECK(m >= prev); // nondecreasing in the order
            prev = m;
        }
        CHECK(std::abs(prev - target) / target < 0.01);
    }
}

TEST_CASE("appendix B pdf equals the 2-stage hypoexponential") {
    CHECK(appendix_b_pdf(1.0, 2.0, 0.09, 0.0) == 0.0);

    const auto lib = make_hypoexponential({1.0, 2.0 / 0.09});
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        CHECK(appendix_b_pdf(1.0, 2.0, 0.09, t) ==
              doctest::Approx(lib.pdf(t)).epsilon(1e-12));
    }

    // Random parameter draws, 1e-12 relative agreement.
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const double l1 = rng.uniform(0.3, 3.0);
        const double l2 = rng.uniform(l1, 4.0);
        const double p1 = rng.uniform(0.02, 0.4);
        const auto d = make_hypoexponential({l1, l2 / p1});
        const double t = rng.uniform(0.05, 4.0);
        const double a = appendix_b_pdf(l1, l2, p1, t);
        const double b = d.pdf(t);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)));
    }

    // Normalization of the closed form.
    const double hi = lib.quantile(1.0 - 1e-9);
    const int n = 400000;
    double mass = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = hi * k / n;
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        mass += w * appendix_b_pdf(1.0, 2.0, 0.09, t);
    }
    mass *= hi / n;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(appendix_b_pdf(2.0, 2.0, 1.0, 1.0), DegenerateRatesError);
}

TEST_CASE("analytic mean approaches exact mean by order 4") {
    auto p = base_params();
    p.order = 4;
    const double m = analytic_latency(p).mean();
    CHECK(m == doctest::Approx(1.0 + (0.1 / 0.9) * 0.5).epsilon(0.01));
}

TEST_CASE("exact sampler matches the exact mean in both modes") {
    auto p = base_params();
    p.harq_delay_ms = 0.3;
    p.order = 4;
    const double target = exact_mean(p);
    const int n = 1000000;
    for (auto mode : {LatencySampleMode::scaled, LatencySampleMode::iid_sum}) {
        Rng rng(99);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += sample_exact(p, mode, rng);
        CHECK(std::abs(acc / n - target) / target < 0.005);
    }
}

TEST_CASE("sampler agrees with the analytic law at low bler") {
    auto p = base_params();
    p.bler = 1e-9;
    p.order = 1;
    Rng rng(5);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_exact(p, LatencySampleMode::iid_sum, rng);
    CHECK(ks_statistic(xs, make_exponential(1.0)) < 0.01);
}

TEST_CASE("sampler vs order-4 analytic law at bler 0.1") {
    auto p = base_params();
    p.order = 4;
    const auto law = analytic_latency(p);
    Rng rng(21);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_exact(p, LatencySampleMode::iid_sum, rng);
    // The analytic law is an approximation; the tolerance is documented, not exact.
    CHECK(ks_statistic(xs, law) <= 0.05);
}

TEST_CASE("analytic pdf is unimodal, right-skewed, and vanishes at zero") {
    auto p = base_params();
    p.order = 4;
    const auto law = analytic_latency(p);
    CHECK(law.pdf(0.0) == doctest::Approx(0.0).epsilon(1e-9));

    // Scan for the mode and check a single sign change of the derivative.
    double prev = law.pdf(0.0);
    int direction_changes = 0;
    bool rising = true;
    for (int k = 1; k <= 2000; ++k) {
        const double t = 12.0 * k / 2000.0;
        const double cur = law.pdf(t);
        if (rising && cur < prev - 1e-12) {
            rising = false;
            ++direction_changes;
        } else if (!rising && cur > prev + 1e-12) {
            ++direction_changes;
        }
        prev = cur;
    }
    CHECK(direction_changes == 1);

    // Right skew: mean above the mode, long right tail.
    const double median = law.quantile(0.5);
    CHECK(law.mean() > median);
}
