#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pqoslat/distributions.hpp"
#include "pqoslat/stats.hpp"

namespace pqoslat::sim {

/// Configuration of one downlink gNB queue run.
///
/// Poisson packet arrivals feed a single server with exponential service per
/// transmission attempt. Each attempt fails independently with probability
/// `bler`; a failed packet re-enters the queue after the HARQ feedback delay
/// (head-of-line when `retx_priority` is set). A packet exhausting `n_max`
/// retransmissions is recorded as delivered at its last attempt.
struct SimConfig {
    double arrival_rate = 0.5;   // beta, 1/ms
    double service_rate = 1.0;   // mu, 1/ms
    double bler = 0.0;           // per-attempt failure probability, [0, 1)
    double harq_delay_ms = 0.0;  // C, dead time before requeue and before ACK
    bool retx_priority = true;
    int n_max = 8;
    double duration_ms = 10000.0; // arrival horizon
    double warmup_ms = 0.0;       // arrivals before this are simulated but not traced
    std::uint64_t seed = 0;

    /// Effective utilization including retransmission load.
    double effective_utilization() const;
    /// Throws InstabilityError / ParameterError on a non-runnable config.
    void validate() const;
};

struct PacketTrace {
    std::uint64_t packet_id = 0;
    double t_arriv_ms = 0.0; // IP-layer availability at the gNB
    double t_ack_ms = 0.0;   // last HARQ ACK reception
    int retx_count = 0;
};

/// Aggregates tracked alongside the traces for queue-theory checks.
struct SimStats {
    double mean_packets_in_system = 0.0; // time average after warmup
    double mean_wait_first_ms = 0.0;     // queueing delay of first attempts
    double mean_wait_retx_ms = 0.0;      // queueing delay of retransmissions
    std::uint64_t arrivals_total = 0;
    std::uint64_t arrivals_after_warmup = 0;
    std::uint64_t retx_attempts = 0;
};

struct SimResult {
    std::vector<PacketTrace> traces; // ordered by completion time
    SimStats stats;
};

/// Runs the discrete-event simulation. Deterministic given the config
/// (event ties broken by sequence number).
SimResult run_des(const SimConfig& config);

struct WindowDelay {
    double window_start_ms = 0.0;
    double p_delay_ms = 0.0;   // floored mean delay of the window
    std::uint64_t sdu_count = 0;
};

struct DelaySeries {
    double window_ms = 0.0;
    double resolution_ms = 0.1;
    std::vector<WindowDelay> windows;
};

/// Per-window mean PDCP delay, floored at `resolution_ms`, over packets whose
/// ACK falls in the window. Empty windows emit no entry.
DelaySeries pdelay_windows(std::span<const PacketTrace> traces, double window_ms,
                           double resolution_ms = 0.1);

struct FitReport {
    double ks = 0.0;
    double wasserstein1 = 0.0;
    std::vector<HistogramBin> histogram;
};

/// Distance between empirical latencies and an analytic law; throws
/// SampleSizeError below 1000 traces.
FitReport empirical_vs_analytic(std::span<const PacketTrace> traces,
                                const ContinuousDistribution& dist,
                                double bin_width_ms = 0.25);

} // namespace pqoslat::sim
