#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "taskrt/cpu_manager.hpp"
#include "taskrt/monitoring.hpp"
#include "taskrt/predictor.hpp"
#include "taskrt/task_graph.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

struct RealEngineConfig {
    PolicyConfig policy;
    PredictorConfig predictor;
    double ema_decay = 0.5;
    bool monitoring = true;
    bool run_predictor = false; // force prediction ticks even for non-prediction policies
};

// Thread backend: one worker std::thread per CPU slot, synthetic spin kernels
// that burn each task's declared duration of wall time. Prediction ticks are
// claimed inline by whichever worker crosses the tick deadline first, so the
// backend adds no extra thread. Parking uses one binary semaphore per worker;
// a release posted before the matching acquire is retained, so wakeups are
// never lost.
class RealEngine {
public:
    RealEngine(const Workload& workload, int n_cpus, RealEngineConfig config);
    ~RealEngine();

    void run();

    TimeNs makespan() const { return makespan_; }
    const Monitoring& monitoring() const { return *mon_; }
    const CpuManager& cpu_manager() const { return *cm_; }
    std::int64_t predictions_published() const { return predictions_; }
    size_t finished_count() const { return graph_->finished_count(); }

private:
    struct WorkerSlot;

    void worker_loop(int idx);
    void maybe_tick(TimeNs now);
    TimeNs now() const;

    const Workload* wl_;
    int n_cpus_;
    RealEngineConfig config_;
    std::unique_ptr<TaskGraph> graph_;
    std::unique_ptr<Monitoring> mon_;
    std::unique_ptr<CpuManager> cm_;
    std::vector<std::unique_ptr<WorkerSlot>> slots_;
    std::vector<std::vector<TaskId>> triggered_;
    std::atomic<bool> done_{false};
    std::atomic<TimeNs> next_tick_{0};
    std::atomic<std::int64_t> predictions_{0};
    TimeNs epoch_ = 0;
    TimeNs makespan_ = 0;
    bool ran_ = false;
};

} // namespace taskrt
