#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskrt/event_log.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

struct EnergyConfig {
    double p_active = 1.0; // power per CPU executing a task
    double p_idle = 0.1;   // power per parked or lent CPU
    double p_spin = 1.0;   // power per busy-spinning CPU

    void validate() const
    {
        if (p_active < 0.0 || p_idle < 0.0 || p_spin < 0.0)
            throw std::invalid_argument("power constants must be nonnegative");
        if (p_idle >= p_spin)
            throw std::invalid_argument("p_idle must be below p_spin");
    }
};

struct EnergyReport {
    double makespan_us = 0.0;
    double energy = 0.0;
    double edp = 0.0;
};

struct EnergyLogError : std::runtime_error {
    size_t record_index;
    EnergyLogError(size_t idx, const std::string& what)
        : std::runtime_error("event log record " + std::to_string(idx) + ": " + what),
          record_index(idx)
    {
    }
};

// Integrates an active/idle power proxy over the per-CPU state timeline of a
// completed run. CPUs outside [cpu_begin, cpu_end) (borrowed from a peer
// runtime) are not billed to this log's runtime; its own lent CPUs are billed
// idle.
inline EnergyReport compute_edp(const EventLog& log, const EnergyConfig& config, int cpu_begin,
                                int cpu_end)
{
    config.validate();
    int n_cpus = cpu_end - cpu_begin;
    if (n_cpus <= 0)
        throw std::invalid_argument("empty cpu domain");
    enum class State { Executing, Spinning, Idle };
    std::vector<State> state(n_cpus, State::Spinning);
    std::vector<TimeNs> since(n_cpus, 0);
    std::vector<double> energy_ns(n_cpus, 0.0);

    TimeNs makespan = 0;
    for (const EventRecord& r : log.records())
        if (r.kind == EventKind::End)
            makespan = std::max(makespan, r.time);
    if (makespan == 0 && !log.records().empty())
        makespan = log.records().back().time;

    auto power = [&](State s) {
        switch (s) {
        case State::Executing: return config.p_active;
        case State::Spinning: return config.p_spin;
        case State::Idle: return config.p_idle;
        }
        return 0.0;
    };
    auto advance = [&](int cpu, TimeNs t, State next, size_t idx, const char* err_active,
                       const char* err_idle) {
        State cur = state[cpu];
        if (err_active && cur != State::Idle)
            throw EnergyLogError(idx, err_active);
        if (err_idle && cur == State::Idle)
            throw EnergyLogError(idx, err_idle);
        TimeNs upto = std::min(t, makespan);
        if (upto > since[cpu]) {
            energy_ns[cpu] += power(cur) * static_cast<double>(upto - since[cpu]);
            since[cpu] = upto;
        }
        state[cpu] = next;
    };

    const auto& records = log.records();
    for (size_t i = 0; i < records.size(); ++i) {
        EventRecord r = records[i];
        if (r.cpu < cpu_begin || r.cpu >= cpu_end)
            continue;
        r.cpu -= cpu_begin;
        switch (r.kind) {
        case EventKind::Start:
            advance(r.cpu, r.time, State::Executing, i, nullptr, "task started on an idle cpu");
            break;
        case EventKind::End:
            advance(r.cpu, r.time, State::Spinning, i, nullptr, "task ended on an idle cpu");
            break;
        case EventKind::Park:
            advance(r.cpu, r.time, State::Idle, i, nullptr, "unmatched park: cpu already idle");
            break;
        case EventKind::Lend:
            advance(r.cpu, r.time, State::Idle, i, nullptr, "lend of an idle cpu");
            break;
        case EventKind::Resume:
            advance(r.cpu, r.time, State::Spinning, i, "unmatched resume: cpu already active", nullptr);
            break;
        case EventKind::Reclaim:
            advance(r.cpu, r.time, State::Spinning, i, "reclaim of an active cpu", nullptr);
            break;
        default:
            break;
        }
    }
    for (int c = 0; c < n_cpus; ++c) {
        if (makespan > since[c])
            energy_ns[c] += power(state[c]) * static_cast<double>(makespan - since[c]);
    }

    EnergyReport rep;
    rep.makespan_us = to_us(makespan);
    for (double e : energy_ns)
        rep.energy += e / 1e3; // power x microseconds
    rep.edp = rep.energy * rep.makespan_us;
    return rep;
}

inline EnergyReport compute_edp(const EventLog& log, const EnergyConfig& config, int n_cpus)
{
    return compute_edp(log, config, 0, n_cpus);
}

} // namespace taskrt
