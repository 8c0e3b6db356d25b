#include "taskrt/real_engine.hpp"

#include <chrono>
#include <semaphore>
#include <stdexcept>
#include <thread>

namespace taskrt {

namespace {
    TimeNs steady_ns()
    {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }

    void spin_kernel(TimeNs duration)
    {
        TimeNs deadline = steady_ns() + duration;
        while (steady_ns() < deadline) {
        }
    }
} // namespace

struct RealEngine::WorkerSlot {
    std::binary_semaphore sem{0};
    std::thread thread;
};

RealEngine::RealEngine(const Workload& workload, int n_cpus, RealEngineConfig config)
    : wl_(&workload), n_cpus_(n_cpus), config_(config)
{
    if (n_cpus_ <= 0)
        throw std::invalid_argument("n_cpus must be positive");
    if (config_.policy.kind == PolicyKind::Prediction)
        config_.monitoring = true;
    graph_ = std::make_unique<TaskGraph>(workload);
    mon_ = std::make_unique<Monitoring>(workload, config_.ema_decay, config_.monitoring);
    cm_ = std::make_unique<CpuManager>(n_cpus_, config_.policy);
    Monitoring* m = mon_.get();
    graph_->set_ready_hook([m](TaskId id) { m->on_ready(id); });
    triggered_.resize(workload.tasks.size());
    for (TaskId id = 0; id < workload.tasks.size(); ++id) {
        TaskId trig = workload.tasks[id].trigger;
        if (trig != kNoTask)
            triggered_[trig].push_back(id);
    }
}

RealEngine::~RealEngine()
{
    done_.store(true, std::memory_order_release);
    for (auto& s : slots_)
        if (s && s->thread.joinable()) {
            s->sem.release();
            s->thread.join();
        }
}

TimeNs RealEngine::now() const { return steady_ns() - epoch_; }

void RealEngine::maybe_tick(TimeNs t)
{
    if (!config_.run_predictor && config_.policy.kind != PolicyKind::Prediction)
        return;
    TimeNs due = next_tick_.load(std::memory_order_acquire);
    if (t < due)
        return;
    // One worker claims the tick; latecomers for the same deadline lose the CAS.
    if (!next_tick_.compare_exchange_strong(due, due + config_.predictor.period,
                                            std::memory_order_acq_rel))
        return;
    std::vector<TypeSnapshot> snap;
    mon_->snapshot(snap);
    Prediction p = get_cpu_prediction(snap, config_.predictor.period, n_cpus_,
                                      config_.predictor.allow_zero, t);
    cm_->set_target(p.target_cpus);
    predictions_.fetch_add(1, std::memory_order_relaxed);
    if (config_.policy.kind == PolicyKind::Prediction) {
        std::vector<int> woken;
        cm_->on_publish(woken);
        for (int th : woken)
            slots_[th]->sem.release();
    }
}

void RealEngine::worker_loop(int idx)
{
    WorkerSlot& slot = *slots_[idx];
    while (!done_.load(std::memory_order_acquire)) {
        maybe_tick(now());
        auto task = graph_->pop_ready();
        if (!task) {
            if (done_.load(std::memory_order_acquire))
                break;
            PollVerdict v = cm_->on_empty_poll(idx);
            if (v == PollVerdict::Park) {
                // Work may have arrived between the failed pop and the park
                // decision; undo the park instead of sleeping through it.
                if ((graph_->ready_count() > 0 || done_.load(std::memory_order_acquire)) &&
                    cm_->cancel_park(idx))
                    continue;
                slot.sem.acquire();
            }
            continue;
        }
        TaskId id = *task;
        cm_->on_dequeue(idx);
        mon_->on_start(id);
        graph_->start(id, now());
        spin_kernel(wl_->tasks[id].duration);
        TimeNs t = now();
        mon_->on_finish(id, t - graph_->record(id).start);

        size_t enq = graph_->complete(id, t).size();
        for (TaskId c : triggered_[id]) {
            mon_->on_create(c);
            if (graph_->create(c))
                enq++;
        }

        if (graph_->all_finished()) {
            makespan_ = now();
            done_.store(true, std::memory_order_release);
            for (auto& s : slots_)
                s->sem.release();
            break;
        }
        if (enq > 0) {
            std::vector<int> woken;
            cm_->on_add(static_cast<int>(enq), woken);
            for (int th : woken)
                slots_[th]->sem.release();
        }
    }
}

void RealEngine::run()
{
    if (ran_)
        throw std::logic_error("engine already ran");
    ran_ = true;

    for (TaskId id = 0; id < wl_->tasks.size(); ++id) {
        if (wl_->tasks[id].trigger != kNoTask)
            continue;
        mon_->on_create(id);
        graph_->create(id);
    }

    epoch_ = steady_ns();
    next_tick_.store(config_.predictor.period, std::memory_order_release);
    slots_.reserve(n_cpus_);
    for (int i = 0; i < n_cpus_; ++i)
        slots_.push_back(std::make_unique<WorkerSlot>());
    for (int i = 0; i < n_cpus_; ++i)
        slots_[i]->thread = std::thread([this, i] { worker_loop(i); });
    for (auto& s : slots_)
        s->thread.join();

    if (!graph_->all_finished())
        throw std::logic_error("real engine exited with unfinished tasks");
}

} // namespace taskrt
