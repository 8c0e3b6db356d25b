#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "taskrt/arbiter.hpp"
#include "taskrt/cpu_manager.hpp"
#include "taskrt/event_log.hpp"
#include "taskrt/monitoring.hpp"
#include "taskrt/predictor.hpp"
#include "taskrt/task_graph.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

struct EngineConfig {
    PolicyConfig policy;
    PredictorConfig predictor;
    double ema_decay = 0.5;
    bool monitoring = true;
    bool run_predictor = false;          // force predictions even when unused (overhead mode)
    TimeNs poll_interval = 1 * kMicrosecond;
    TimeNs wake_latency = 10 * kMicrosecond; // resume signal -> first poll
    bool collect_log = true;
};

struct RuntimeSetup {
    const Workload* workload = nullptr;
    int n_cpus = 8;
};

struct SharingSetup {
    SharingPolicy policy;
    TimeNs call_latency = 1 * kMicrosecond;
};

// Deterministic discrete-event backend. Task bodies advance the virtual clock
// by their declared duration; identical inputs produce identical event logs.
// Hosts one runtime instance, or two that share the combined CPU set through
// a SharingArbiter.
class VirtualEngine {
public:
    VirtualEngine(std::vector<RuntimeSetup> runtimes, EngineConfig config,
                  std::optional<SharingSetup> sharing = std::nullopt);
    ~VirtualEngine();

    void run();

    int n_runtimes() const { return static_cast<int>(runtimes_.size()); }
    TimeNs makespan(int r = 0) const;
    const EventLog& log(int r = 0) const;
    const Monitoring& monitoring(int r = 0) const;
    const CpuManager& cpu_manager(int r = 0) const;
    const SharingArbiter* arbiter() const { return arbiter_.get(); }
    int cpu_base(int r) const;
    int cpu_count(int r) const;
    int total_cpus() const { return total_cpus_; }

private:
    enum class EvKind : std::uint8_t { Poll, Done, Tick, LendFinish, Wake };
    enum class WState : std::uint8_t { Active, Parked, Lending, Waking };

    struct Ev {
        TimeNs t;
        std::uint64_t seq;
        EvKind kind;
        std::uint8_t rt;
        std::int16_t worker;
        TaskId task;
        bool operator>(const Ev& o) const { return t != o.t ? t > o.t : seq > o.seq; }
    };

    struct Worker {
        int cpu = -1;
        WState state = WState::Active;
        int spin_count = 0; // hybrid sharing budget
    };

    struct Runtime;

    void schedule(TimeNs t, EvKind k, int rt, int worker, TaskId task = kNoTask);
    void handle_poll(const Ev& ev);
    void handle_done(const Ev& ev);
    void handle_tick(const Ev& ev);
    void handle_lend_finish(const Ev& ev);
    void handle_wake(const Ev& ev);
    bool handle_reclaim_check(Runtime& rt, int rtid, int worker, TimeNs t);
    void bind_and_wake(int rtid, int cpu, TimeNs t);
    void resume_own(int rtid, int thread, TimeNs t);
    void finish_runtime(Runtime& rt, int rtid, TimeNs t);
    bool predictor_enabled(const Runtime& rt) const;

    EngineConfig config_;
    std::optional<SharingSetup> sharing_;
    std::vector<std::unique_ptr<Runtime>> runtimes_;
    std::unique_ptr<SharingArbiter> arbiter_;
    int total_cpus_ = 0;
    std::vector<Ev> heap_;
    std::uint64_t seq_ = 0;
    int unfinished_ = 0;
    bool ran_ = false;
};

// Convenience wrapper: single-runtime virtual run.
struct VirtualRunResult {
    TimeNs makespan = 0;
    std::int64_t parks = 0;
    std::int64_t resumes = 0;
};

} // namespace taskrt
