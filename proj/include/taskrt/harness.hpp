#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskrt/arbiter.hpp"
#include "taskrt/cpu_manager.hpp"
#include "taskrt/energy.hpp"
#include "taskrt/generators.hpp"
#include "taskrt/monitoring.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

enum class Backend { Virtual, Real };

const char* backend_name(Backend b);
bool parse_backend(const std::string& s, Backend& out);
bool parse_policy(const std::string& s, PolicyKind& out);
bool parse_sharing(const std::string& s, SharingKind& out);

struct RunConfig {
    BenchmarkSpec bench;
    PolicyKind policy = PolicyKind::Busy;
    Backend backend = Backend::Virtual;
    int cpus = 8;
    double pred_rate_us = 50.0;
    double ema_decay = 0.5;
    int spin_budget = 100;
    std::uint64_t seed = 1;
    int rep = 0;
    bool monitoring = true;
    bool run_predictor = false;
    bool emit_trace = false;
    bool validate = true;
    std::string out_dir;
    EnergyConfig energy;
    // Sharing run: a second workload on its own CPU partition, both runtimes
    // sharing the combined set through the arbiter.
    std::optional<BenchmarkSpec> share_bench;
    SharingKind share_policy = SharingKind::Lewi;
    TimeNs arbiter_latency = 1 * kMicrosecond;
};

struct RuntimeResult {
    std::string bench;
    double makespan_us = 0.0;
    EnergyReport energy;
    AccuracyReport accuracy;
    ArbiterCounters arbiter;
    std::int64_t parks = 0;
    std::int64_t resumes = 0;
    std::vector<std::string> violations;
};

struct RunResult {
    std::string run_id;
    RunConfig config;
    std::vector<RuntimeResult> runtimes;
    double wall_ms = 0.0; // host time spent, real backend only

    const RuntimeResult& primary() const { return runtimes.front(); }
};

std::string run_id_for(const RunConfig& cfg);

// Executes one configuration. Emits per-run CSV artifacts into cfg.out_dir
// when set; throws on validation failure when cfg.validate is on.
RunResult run_single(const RunConfig& cfg);

// CSV writers; all floats use a fixed %.6f so reruns are byte-comparable.
void write_energy_csv(std::ostream& os, const std::vector<RunResult>& runs);
void write_accuracy_csv(std::ostream& os, const AccuracyReport& report);
void write_arbiter_csv(std::ostream& os, const RunResult& run);

} // namespace taskrt
