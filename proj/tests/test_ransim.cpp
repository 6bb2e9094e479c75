#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pqoslat/errors.hpp"
#include "pqoslat/latency_model.hpp"
#include "pqoslat/queueing.hpp"
#include "pqoslat/ransim.hpp"

using namespace pqoslat;
using namespace pqoslat::sim;

namespace {

SimConfig baseline() {
    SimConfig cfg;
    cfg.arrival_rate = 0.5;
    cfg.service_rate = 1.0;
    cfg.bler = 0.0;
    cfg.harq_delay_ms = 0.0;
    cfg.duration_ms = 220000.0;
    cfg.warmup_ms = 2000.0;
    cfg.seed = 1;
    return cfg;
}

std::vector<double> delays(const SimResult& result) {
    std::vector<double> out;
    out.reserve(result.traces.size());
    for (const auto& tr : result.traces) out.push_back(tr.t_ack_ms - tr.t_arriv_ms);
    return out;
}

} // namespace

TEST_CASE("bler 0 latencies follow the M/M/1 sojourn law") {
    const auto result = run_des(baseline());
    REQUIRE(result.traces.size() > 100000);
    const auto xs = delays(result);
    CHECK(ks_statistic(xs, mm1_sojourn({0.5, 1.0})) < 0.02);
    const double mean = sample_mean(xs);
    CHECK(std::abs(mean - 2.0) / 2.0 < 0.02);
}

TEST_CASE("first-attempt failure fraction equals bler") {
    auto cfg = baseline();
    cfg.bler = 0.1;
    cfg.duration_ms = 220000.0;
    const auto result = run_des(cfg);
    REQUIRE(result.traces.size() > 100000);
    std::size_t with_retx = 0;
    for (const auto& tr : result.traces) {
        if (tr.retx_count >= 1) ++with_retx;
    }
    const double frac = static_cast<double>(with_retx) / result.traces.size();
    CHECK(std::abs(frac - 0.1) < 0.005);
}

TEST_CASE("unstable configs are rejected before running") {
    auto cfg = baseline();
    cfg.arrival_rate = 1.0;
    CHECK_THROWS_AS(run_des(cfg), InstabilityError);

    // Stable without retransmissions, unstable with them.
    cfg = baseline();
    cfg.arrival_rate = 0.9;
    cfg.bler = 0.3;
    CHECK_THROWS_AS(run_des(cfg), InstabilityError);

    cfg = baseline();
    cfg.warmup_ms = cfg.duration_ms;
    CHECK_THROWS_AS(run_des(cfg), ParameterError);
}

TEST_CASE("conservation: every post-warmup arrival is traced exactly once") {
    auto cfg = baseline();
    cfg.bler = 0.15;
    cfg.arrival_rate = 0.4;
    cfg.duration_ms = 30000.0;
    const auto result = run_des(cfg);
    CHECK(result.traces.size() == result.stats.arrivals_after_warmup);
    std::set<std::uint64_t> ids;
    for (const auto& tr : result.traces) {
        CHECK(ids.insert(tr.packet_id).second);
        CHECK(tr.t_ack_ms > tr.t_arriv_ms);
        CHECK(tr.retx_count >= 0);
        CHECK(tr.retx_count <= cfg.n_max);
    }
}

TEST_CASE("priority requeue shortens retransmission waits") {
    auto cfg = baseline();
    cfg.bler = 0.2;
    cfg.arrival_rate = 0.4;
    cfg.retx_priority = true;
    cfg.duration_ms = 120000.0;
    const auto result = run_des(cfg);
    REQUIRE(result.stats.retx_attempts > 1000);
    CHECK(result.stats.mean_wait_retx_ms <= result.stats.mean_wait_first_ms);
}

TEST_CASE("Little's law holds at bler 0") {
    const auto result = run_des(baseline());
    const double mean_sojourn = sample_mean(delays(result));
    const double expected = 0.5 * mean_sojourn;
    CHECK(std::abs(result.stats.mean_packets_in_system - expected) / expected < 0.03);
}

TEST_CASE("mean latency is monotone in bler and arrival rate") {
    double means[4][4];
    const double blers[4] = {0.0, 0.05, 0.1, 0.2};
    const double betas[4] = {0.2, 0.35, 0.5, 0.65};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            SimConfig cfg = baseline();
            cfg.bler = blers[i];
            cfg.arrival_rate = betas[j];
            cfg.harq_delay_ms = 0.5;
            cfg.duration_ms = 140000.0;
            cfg.seed = 77; // common random numbers across the grid
            means[i][j] = sample_mean(delays(run_des(cfg)));
        }
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            if (i > 0) CHECK(means[i][j] >= means[i - 1][j]);
            if (j > 0) CHECK(means[i][j] >= means[i][j - 1]);
        }
    }
}

TEST_CASE("identical configs give identical traces") {
    auto cfg = baseline();
    cfg.bler = 0.1;
    cfg.duration_ms = 20000.0;
    const auto a = run_des(cfg);
    const auto b = run_des(cfg);
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t i = 0; i < a.traces.size(); ++i) {
        CHECK(a.traces[i].packet_id == b.traces[i].packet_id);
        CHECK(a.traces[i].t_arriv_ms == b.traces[i].t_arriv_ms);
        CHECK(a.traces[i].t_ack_ms == b.traces[i].t_ack_ms);
        CHECK(a.traces[i].retx_count == b.traces[i].retx_count);
    }
}

TEST_CASE("pdelay windows floor the mean at the configured resolution") {
    std::vector<PacketTrace> traces = {
        {0, 1.0, 4.2, 0},  // delay 3.2
        {1, 2.0, 6.8, 0},  // delay 4.8
        {2, 3.0, 7.1, 0},  // delay 4.1
    };
    const auto series = pdelay_windows(traces, 10.0, 1.0);
    REQUIRE(series.windows.size() == 1);
    CHECK(series.windows[0].p_delay_ms == doctest::Approx(4.0));
    CHECK(series.windows[0].sdu_count == 3);

    std::vector<PacketTrace> single = {{0, 1.0, 8.9, 0}};
    const auto s2 = pdelay_windows(single, 10.0, 0.1);
    REQUIRE(s2.windows.size() == 1);
    CHECK(s2.windows[0].p_delay_ms == doctest::Approx(7.9));

    CHECK(pdelay_windows({}, 10.0).windows.empty());
}

TEST_CASE("window means concentrate around the sojourn mean") {
    auto cfg = baseline();
    cfg.duration_ms = 502000.0;
    const auto result = run_des(cfg);
    const auto series = pdelay_windows(result.traces, 5000.0, 1e-9);
    REQUIRE(series.windows.size() >= 100);
    std::vector<double> window_means;
    for (const auto& w : series.windows) window_means.push_back(w.p_delay_ms);
    // CLT-scale spread around 2 ms: per-window count ~ 2500 packets.
    const double grand = sample_mean(window_means);
    CHECK(std::abs(grand - 2.0) < 0.1);
    const double sd = std::sqrt(sample_variance(window_means));
    CHECK(sd < 10.0 * 2.0 / std::sqrt(2500.0));
}

TEST_CASE("empirical-vs-analytic report") {
    const auto result = run_des(baseline());
    const auto law = mm1_sojourn({0.5, 1.0});
    const auto report = empirical_vs_analytic(result.traces, law);
    CHECK(report.ks < 0.02);
    CHECK(report.wasserstein1 < 0.1);
    CHECK(!report.histogram.empty());

    std::vector<PacketTrace> tiny(result.traces.begin(), result.traces.begin() + 10);
    CHECK_THROWS_AS(empirical_vs_analytic(tiny, law), SampleSizeError);
}

TEST_CASE("bler 0.1 matches the order-4 analytic law") {
    // At low utilization the order-4 approximation error alone exceeds 0.05;
    // beta=0.7 keeps the first stage dominant and the KS near 0.034.
    auto cfg = baseline();
    cfg.bler = 0.1;
    cfg.harq_delay_ms = 0.2;
    cfg.arrival_rate = 0.7;
    cfg.duration_ms = 160000.0;
    const auto result = run_des(cfg);
    REQUIRE(result.traces.size() > 100000);

    LatencyModelParams p;
    const double rho_eff = cfg.effective_utilization();
    p.lambda1 = cfg.service_rate * (1.0 - rho_eff);
    p.lambda2 = cfg.service_rate / (1.0 + rho_eff);
    p.harq_delay_ms = cfg.harq_delay_ms;
    p.bler = cfg.bler;
    p.n_max = cfg.n_max;
    p.order = 4;
    const auto report = empirical_vs_analytic(result.traces, analytic_latency(p));
    CHECK(report.ks <= 0.05);
}
