#include "pqoslat/ransim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <string>

#include "pqoslat/errors.hpp"
#include "pqoslat/rng.hpp"

namespace pqoslat::sim {

double SimConfig::effective_utilization() const {
    const GeometricLaw law{1.0 - bler, n_max};
    return arrival_rate * (1.0 + law.mean()) / service_rate;
}

void SimConfig::validate() const {
    if (!(arrival_rate > 0.0) || !(service_rate > 0.0)) {
        throw ParameterError("arrival and service rates must be positive");
    }
    if (!(bler >= 0.0 && bler < 1.0)) {
        throw ParameterError("bler must lie in [0, 1)");
    }
    if (harq_delay_ms < 0.0) throw ParameterError("HARQ delay must be nonnegative");
    if (n_max < 0) throw ParameterError("n_max must be nonnegative");
    if (!(duration_ms > warmup_ms) || warmup_ms < 0.0) {
        throw ParameterError("need duration > warmup >= 0");
    }
    if (!(effective_utilization() < 1.0)) {
        throw InstabilityError("effective utilization " +
                               std::to_string(effective_utilization()) +
                               " >= 1 (retransmission load included)");
    }
}

namespace {

enum class EventKind { arrival, service_done, requeue };

struct Event {
    double time;
    std::uint64_t seq; // tie-breaker, assigned in schedule order
    EventKind kind;
    std::uint64_t packet = 0;

    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        return seq > other.seq;
    }
};

struct Packet {
    double t_arriv = 0.0;
    double t_enqueue = 0.0; // arrival or requeue-ready time of the pending attempt
    int retx_count = 0;
};

} // namespace

SimResult run_des(const SimConfig& config) {
    config.validate();
    Rng rng(config.seed);

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    std::uint64_t seq = 0;
    auto schedule = [&](double t, EventKind kind, std::uint64_t packet) {
        events.push(Event{t, seq++, kind, packet});
    };

    std::vector<Packet> packets;
    std::deque<std::uint64_t> queue;
    bool server_busy = false;
    std::uint64_t in_service = 0;

    SimResult result;
    SimStats& stats = result.stats;

    // Time-integral of the number of unfinished packets, accumulated after
    // warmup for the Little's-law statistic.
    double area = 0.0;
    std::uint64_t n_in_system = 0;
    double last_time = 0.0;
    auto advance_clock = [&](double now) {
        const double from = std::max(last_time, config.warmup_ms);
        if (now > from) area += static_cast<double>(n_in_system) * (now - from);
        last_time = now;
    };

    double wait_first_sum = 0.0, wait_retx_sum = 0.0;
    std::uint64_t wait_first_n = 0, wait_retx_n = 0;

    auto start_service_if_idle = [&](double now) {
        if (server_busy || queue.empty()) return;
        const std::uint64_t id = queue.front();
        queue.pop_front();
        server_busy = true;
        in_service = id;
        const double wait = now - packets[id].t_enqueue;
        if (packets[id].retx_count == 0) {
            wait_first_sum += wait;
            ++wait_first_n;
        } else {
            wait_retx_sum += wait;
            ++wait_retx_n;
        }
        schedule(now + rng.exponential(config.service_rate), EventKind::service_done, id);
    };

    // First arrival; subsequent ones are chained from each arrival event.
    {
        const double t0 = rng.exponential(config.arrival_rate);
        if (t0 <= config.duration_ms) schedule(t0, EventKind::arrival, 0);
    }

    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        advance_clock(ev.time);

        switch (ev.kind) {
        case EventKind::arrival: {
            const std::uint64_t id = packets.size();
            packets.push_back(Packet{ev.time, ev.time, 0});
            ++stats.arrivals_total;
            if (ev.time >= config.warmup_ms) ++stats.arrivals_after_warmup;
            ++n_in_system;
            queue.push_back(id);
            start_service_if_idle(ev.time);
            const double next = ev.time + rng.exponential(config.arrival_rate);
            if (next <= config.duration_ms) schedule(next, EventKind::arrival, 0);
            break;
        }
        case EventKind::service_done: {
            const std::uint64_t id = ev.packet;
            server_busy = false;
            Packet& pkt = packets[id];
            const bool failed = rng.bernoulli(config.bler);
            if (failed && pkt.retx_count < config.n_max) {
                ++pkt.retx_count;
                ++stats.retx_attempts;
                schedule(ev.time + config.harq_delay_ms, EventKind::requeue, id);
            } else {
                // Delivered (or retry budget exhausted, still counted as
                // delivered at the last attempt). The ACK travels one HARQ
                // feedback delay after the final service completion.
                --n_in_system;
                if (pkt.t_arriv >= config.warmup_ms) {
                    result.traces.push_back(PacketTrace{
                        id, pkt.t_arriv, ev.time + config.harq_delay_ms, pkt.retx_count});
                }
            }
            start_service_if_idle(ev.time);
            break;
        }
        case EventKind::requeue: {
            const std::uint64_t id = ev.packet;
            packets[id].t_enqueue = ev.time;
            if (config.retx_priority) {
                queue.push_front(id);
            } else {
                queue.push_back(id);
            }
            start_service_if_idle(ev.time);
            break;
        }
        }
    }

    const double observed = last_time - config.warmup_ms;
    stats.mean_packets_in_system = observed > 0.0 ? area / observed : 0.0;
    stats.mean_wait_first_ms = wait_first_n ? wait_first_sum / wait_first_n : 0.0;
    stats.mean_wait_retx_ms = wait_retx_n ? wait_retx_sum / wait_retx_n : 0.0;

    std::sort(result.traces.begin(), result.traces.end(),
              [](const PacketTrace& a, const PacketTrace& b) {
                  if (a.t_ack_ms != b.t_ack_ms) return a.t_ack_ms < b.t_ack_ms;
                  return a.packet_id < b.packet_id;
              });
    return result;
}

DelaySeries pdelay_windows(std::span<const PacketTrace> traces, double window_ms,
                           double resolution_ms) {
    if (!(window_ms > 0.0)) throw ParameterError("window width must be positive");
    if (!(resolution_ms > 0.0)) throw ParameterError("resolution must be positive");
    DelaySeries series;
    series.window_ms = window_ms;
    series.resolution_ms = resolution_ms;

    std::int64_t current = -1;
    double sum = 0.0;
    std::uint64_t count = 0;
    auto flush = [&]() {
        if (count == 0) return;
        const double mean = sum / static_cast<double>(count);
        const double floored = std::floor(mean / resolution_ms) * resolution_ms;
        series.windows.push_back(
            WindowDelay{static_cast<double>(current) * window_ms, floored, count});
    };
    for (const PacketTrace& tr : traces) {
        const auto w = static_cast<std::int64_t>(std::floor(tr.t_ack_ms / window_ms));
        if (w != current) {
            flush();
            current = w;
            sum = 0.0;
            count = 0;
        }
        sum += tr.t_ack_ms - tr.t_arriv_ms;
        ++count;
    }
    flush();
    return series;
}

FitReport empirical_vs_analytic(std::span<const PacketTrace> traces,
                                const ContinuousDistribution& dist,
                                double bin_width_ms) {
    if (traces.size() < 1000) {
        throw SampleSizeError("empirical comparison needs at least 1000 traces, got " +
                              std::to_string(traces.size()));
    }
    std::vector<double> delays;
    delays.reserve(traces.size());
    for (const PacketTrace& tr : traces) delays.push_back(tr.t_ack_ms - tr.t_arriv_ms);
    FitReport report;
    report.ks = ks_statistic(delays, dist);
    report.wasserstein1 = wasserstein1(delays, dist);
    report.histogram = histogram_density(delays, bin_width_ms, &dist);
    return report;
}

} // namespace pqoslat::sim
