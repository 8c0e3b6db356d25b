#include "taskrt/virtual_engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace taskrt {

struct VirtualEngine::Runtime {
    const Workload* wl = nullptr;
    int n_own = 0;
    int cpu_base = 0;
    TaskGraph graph;
    Monitoring mon;
    std::unique_ptr<CpuManager> cm;
    EventLog log;
    std::vector<std::vector<TaskId>> triggered;
    std::vector<Worker> workers;
    std::vector<TimeNs> poll_delay; // billed arbiter-call latency per worker
    bool finished = false;
    TimeNs makespan = 0;
    TimeNs now = 0;        // clock of the event being handled, read by the ready hook
    int pending_ready = 0; // ready transitions since last worker action, for ADD batching

    Runtime(const Workload& w, double ema, bool mon_on)
        : wl(&w), graph(w), mon(w, ema, mon_on) {}
};

VirtualEngine::VirtualEngine(std::vector<RuntimeSetup> setups, EngineConfig config,
                             std::optional<SharingSetup> sharing)
    : config_(config), sharing_(sharing) {
    if (setups.empty() || setups.size() > 2)
        throw std::invalid_argument("engine hosts one or two runtimes");
    if (sharing_ && setups.size() != 2)
        throw std::invalid_argument("sharing requires two runtimes");
    if (config_.policy.kind == PolicyKind::Prediction)
        config_.monitoring = true;

    std::vector<int> owners;
    for (const auto& s : setups) {
        if (!s.workload || s.n_cpus <= 0)
            throw std::invalid_argument("bad runtime setup");
        total_cpus_ += s.n_cpus;
        auto rt = std::make_unique<Runtime>(*s.workload, config_.ema_decay, config_.monitoring);
        rt->n_own = s.n_cpus;
        runtimes_.push_back(std::move(rt));
    }
    int base = 0;
    for (std::size_t r = 0; r < runtimes_.size(); ++r) {
        auto& rt = *runtimes_[r];
        rt.cpu_base = base;
        for (int c = 0; c < rt.n_own; ++c)
            owners.push_back(static_cast<int>(r));
        base += rt.n_own;

        int n_threads = sharing_ ? total_cpus_ : rt.n_own;
        rt.cm = std::make_unique<CpuManager>(rt.n_own, config_.policy, n_threads);
        rt.workers.resize(static_cast<std::size_t>(n_threads));
        rt.poll_delay.assign(static_cast<std::size_t>(n_threads), 0);
        for (int w = 0; w < n_threads; ++w) {
            if (w < rt.n_own) {
                rt.workers[w].cpu = rt.cpu_base + w;
                rt.workers[w].state = WState::Active;
            } else {
                rt.workers[w].state = WState::Parked;
            }
        }
        rt.triggered.resize(rt.wl->tasks.size());
        for (TaskId id = 0; id < rt.wl->tasks.size(); ++id) {
            TaskId trig = rt.wl->tasks[id].trigger;
            if (trig != kNoTask)
                rt.triggered[trig].push_back(id);
        }

        Runtime* rp = &rt;
        bool collect = config_.collect_log;
        rt.graph.set_ready_hook([rp, collect](TaskId id) {
            rp->mon.on_ready(id);
            if (collect)
                rp->log.log_task(rp->now, EventKind::Ready, -1, -1, id, rp->wl->tasks[id].type);
            ++rp->pending_ready;
        });
    }
    if (sharing_)
        arbiter_ = std::make_unique<SharingArbiter>(owners, static_cast<int>(runtimes_.size()),
                                                    sharing_->call_latency);
    unfinished_ = static_cast<int>(runtimes_.size());
}

VirtualEngine::~VirtualEngine() = default;

bool VirtualEngine::predictor_enabled(const Runtime&) const {
    if (config_.run_predictor)
        return true;
    if (config_.policy.kind == PolicyKind::Prediction)
        return true;
    return sharing_ && sharing_->policy.kind == SharingKind::Prediction;
}

void VirtualEngine::schedule(TimeNs t, EvKind k, int rt, int worker, TaskId task) {
    heap_.push_back(Ev{t, seq_++, k, static_cast<std::uint8_t>(rt),
                       static_cast<std::int16_t>(worker), task});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
}

void VirtualEngine::run() {
    if (ran_)
        throw std::logic_error("engine already ran");
    ran_ = true;

    for (std::size_t r = 0; r < runtimes_.size(); ++r) {
        auto& rt = *runtimes_[r];
        rt.now = 0;
        for (TaskId id = 0; id < rt.wl->tasks.size(); ++id) {
            if (rt.wl->tasks[id].trigger != kNoTask)
                continue;
            rt.mon.on_create(id);
            if (config_.collect_log)
                rt.log.log_task(0, EventKind::Create, -1, -1, id, rt.wl->tasks[id].type);
            rt.graph.create(id);
        }
        rt.pending_ready = 0;
        for (std::size_t w = 0; w < rt.workers.size(); ++w)
            if (rt.workers[w].state == WState::Active)
                schedule(0, EvKind::Poll, static_cast<int>(r), static_cast<int>(w));
        if (predictor_enabled(rt))
            schedule(config_.predictor.period, EvKind::Tick, static_cast<int>(r), -1);
    }

    while (!heap_.empty() && unfinished_ > 0) {
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
        Ev ev = heap_.back();
        heap_.pop_back();
        switch (ev.kind) {
        case EvKind::Poll: handle_poll(ev); break;
        case EvKind::Done: handle_done(ev); break;
        case EvKind::Tick: handle_tick(ev); break;
        case EvKind::LendFinish: handle_lend_finish(ev); break;
        case EvKind::Wake: handle_wake(ev); break;
        }
    }
    if (unfinished_ > 0)
        throw std::logic_error("deadlock: event queue drained with tasks outstanding");
}

// Returns true if the worker vacated its CPU (caller must not continue the poll).
bool VirtualEngine::handle_reclaim_check(Runtime& rt, int rtid, int worker, TimeNs t) {
    if (!arbiter_)
        return false;
    int cpu = rt.workers[worker].cpu;
    if (arbiter_->owner(cpu) == rtid || !arbiter_->reclaim_requested(cpu))
        return false;
    int owner = arbiter_->owner(cpu);
    Runtime& ort = *runtimes_[owner];
    if (ort.finished || ort.cm->parked_count() == 0) {
        arbiter_->clear_reclaim(cpu);
        return false;
    }
    arbiter_->finish_reclaim(cpu);
    rt.cm->force_park(worker);
    rt.workers[worker].state = WState::Parked;
    rt.workers[worker].cpu = -1;
    if (config_.collect_log)
        rt.log.log_cpu(t, EventKind::Park, cpu, worker);
    int othread = ort.cm->pop_parked();
    ort.workers[othread].cpu = cpu;
    resume_own(owner, othread, t);
    return true;
}

void VirtualEngine::resume_own(int rtid, int thread, TimeNs t) {
    Runtime& rt = *runtimes_[rtid];
    if (thread < 0)
        throw std::logic_error("resume with empty park list");
    Worker& w = rt.workers[thread];
    if (w.cpu < 0)
        throw std::logic_error("own resume on unbound worker");
    w.state = WState::Active;
    w.spin_count = 0;
    if (config_.collect_log)
        rt.log.log_cpu(t, EventKind::Resume, w.cpu, thread);
    schedule(t + config_.wake_latency, EvKind::Poll, rtid, thread);
}

// Reserves a parked worker for an acquired CPU now; the resume itself lands
// at t_when (arbiter call latency) via a Wake event so logs stay monotonic.
void VirtualEngine::bind_and_wake(int rtid, int cpu, TimeNs t_when) {
    Runtime& rt = *runtimes_[rtid];
    int thread = rt.cm->pop_parked();
    if (thread < 0)
        throw std::logic_error("acquired a CPU with no parked worker");
    Worker& w = rt.workers[thread];
    w.cpu = cpu;
    w.state = WState::Waking;
    w.spin_count = 0;
    schedule(t_when, EvKind::Wake, rtid, thread);
}

void VirtualEngine::handle_wake(const Ev& ev) {
    Runtime& rt = *runtimes_[ev.rt];
    if (rt.finished)
        return; // shutdown already returned this worker's CPU
    Worker& w = rt.workers[ev.worker];
    w.state = WState::Active;
    if (config_.collect_log)
        rt.log.log_cpu(ev.t, EventKind::Resume, w.cpu, ev.worker);
    schedule(ev.t + config_.wake_latency, EvKind::Poll, ev.rt, ev.worker);
}

void VirtualEngine::handle_poll(const Ev& ev) {
    Runtime& rt = *runtimes_[ev.rt];
    if (rt.finished)
        return;
    Worker& w = rt.workers[ev.worker];
    if (w.state != WState::Active)
        throw std::logic_error("poll event for inactive worker");
    TimeNs t = ev.t;

    if (handle_reclaim_check(rt, ev.rt, ev.worker, t))
        return;

    auto task = rt.graph.pop_ready();
    if (task) {
        TaskId id = *task;
        w.spin_count = 0;
        if (!arbiter_)
            rt.cm->on_dequeue(ev.worker);
        rt.mon.on_start(id);
        rt.graph.start(id, t);
        if (config_.collect_log)
            rt.log.log_task(t, EventKind::Start, w.cpu, ev.worker, id, rt.wl->tasks[id].type);
        schedule(t + rt.wl->tasks[id].duration, EvKind::Done, ev.rt, ev.worker, id);
        return;
    }

    if (!arbiter_) {
        PollVerdict v = rt.cm->on_empty_poll(ev.worker);
        if (v == PollVerdict::Spin) {
            schedule(t + config_.poll_interval, EvKind::Poll, ev.rt, ev.worker);
        } else {
            w.state = WState::Parked;
            if (config_.collect_log)
                rt.log.log_cpu(t, EventKind::Park, w.cpu, ev.worker);
        }
        return;
    }

    // Sharing mode: decide whether this empty poll surrenders the CPU.
    bool lend = false;
    switch (sharing_->policy.kind) {
    case SharingKind::Lewi:
        lend = true;
        break;
    case SharingKind::Hybrid:
        lend = ++w.spin_count >= sharing_->policy.spin_budget;
        break;
    case SharingKind::Prediction:
        lend = rt.cm->active() > rt.cm->target();
        break;
    }
    if (lend) {
        w.state = WState::Lending;
        schedule(t + sharing_->call_latency, EvKind::LendFinish, ev.rt, ev.worker);
    } else {
        schedule(t + config_.poll_interval, EvKind::Poll, ev.rt, ev.worker);
    }
}

void VirtualEngine::handle_lend_finish(const Ev& ev) {
    Runtime& rt = *runtimes_[ev.rt];
    Worker& w = rt.workers[ev.worker];
    int cpu = w.cpu;
    rt.cm->force_park(ev.worker);
    w.state = WState::Parked;
    w.cpu = -1;
    arbiter_->lend(ev.rt, cpu);
    if (config_.collect_log)
        rt.log.log_cpu(ev.t, EventKind::Lend, cpu, ev.worker);
}

void VirtualEngine::finish_runtime(Runtime& rt, int rtid, TimeNs t) {
    rt.finished = true;
    rt.makespan = t;
    --unfinished_;
    if (!arbiter_ || unfinished_ == 0)
        return;
    // Hand every CPU this runtime still holds to the pool so the peer can
    // take it. Lending workers finish their in-flight lend on their own;
    // waking workers never logged a resume, so their CPU goes back silently.
    for (std::size_t i = 0; i < rt.workers.size(); ++i) {
        Worker& w = rt.workers[i];
        if (w.cpu < 0 || w.state == WState::Lending)
            continue;
        arbiter_->lend(rtid, w.cpu);
        if (w.state == WState::Active && config_.collect_log)
            rt.log.log_cpu(t, EventKind::Lend, w.cpu, static_cast<int>(i));
        w.cpu = -1;
        w.state = WState::Parked;
    }
}

void VirtualEngine::handle_done(const Ev& ev) {
    Runtime& rt = *runtimes_[ev.rt];
    Worker& w = rt.workers[ev.worker];
    TimeNs t = ev.t;
    TaskId id = ev.task;

    rt.mon.on_finish(id, t - rt.graph.record(id).start);
    if (config_.collect_log)
        rt.log.log_task(t, EventKind::End, w.cpu, ev.worker, id, rt.wl->tasks[id].type);

    rt.now = t;
    rt.pending_ready = 0;
    rt.graph.complete(id, t);
    for (TaskId c : rt.triggered[id]) {
        rt.mon.on_create(c);
        if (config_.collect_log)
            rt.log.log_task(t, EventKind::Create, -1, -1, c, rt.wl->tasks[c].type);
        rt.graph.create(c);
    }
    int n_enq = rt.pending_ready;
    rt.pending_ready = 0;

    if (rt.graph.all_finished()) {
        finish_runtime(rt, ev.rt, t);
        return;
    }

    TimeNs delay = 0;
    if (n_enq > 0) {
        if (!arbiter_) {
            std::vector<int> woken;
            rt.cm->on_add(n_enq, woken);
            for (int th : woken)
                resume_own(ev.rt, th, t);
        }
    }
    // Reactive sharing path: every completion with a backlog tries the
    // arbiter, and every attempt is a billed call on the completing worker.
    if (arbiter_ && sharing_->policy.kind != SharingKind::Prediction) {
        int backlog = static_cast<int>(rt.graph.ready_count());
        int parked = rt.cm->parked_count();
        if (backlog > 0 && parked > 0) {
            int want = std::min(backlog, parked);
            std::vector<int> got;
            arbiter_->acquire(ev.rt, want, got);
            delay += sharing_->call_latency;
            for (int cpu : got)
                bind_and_wake(ev.rt, cpu, t + delay);
            if (static_cast<int>(got.size()) < want) {
                // Pool exhausted: call everything of ours back.
                for (;;) {
                    int c = arbiter_->first_borrowed_out(ev.rt);
                    if (c < 0 || !arbiter_->reclaim(ev.rt, c))
                        break;
                    delay += sharing_->call_latency;
                }
            }
        }
    }
    schedule(t + delay, EvKind::Poll, ev.rt, ev.worker);
}

void VirtualEngine::handle_tick(const Ev& ev) {
    Runtime& rt = *runtimes_[ev.rt];
    if (rt.finished)
        return;
    TimeNs t = ev.t;
    std::vector<TypeSnapshot> snap;
    rt.mon.snapshot(snap);
    int n_for_pred = arbiter_ ? total_cpus_ : rt.n_own;
    Prediction p = get_cpu_prediction(snap, config_.predictor.period, n_for_pred,
                                      config_.predictor.allow_zero, t);
    rt.cm->set_target(p.target_cpus);
    if (config_.collect_log)
        rt.log.log_prediction(t, p.target_cpus, p.contributions);

    if (config_.policy.kind == PolicyKind::Prediction) {
        if (!arbiter_) {
            std::vector<int> woken;
            rt.cm->on_publish(woken);
            for (int th : woken)
                resume_own(ev.rt, th, t);
        } else if (sharing_->policy.kind == SharingKind::Prediction) {
            int want = p.target_cpus - rt.cm->active();
            if (want > rt.cm->parked_count())
                want = rt.cm->parked_count();
            if (want > 0) {
                std::vector<int> got;
                // Don't burn an arbiter call when the pool is known empty.
                if (arbiter_->lent_count() > 0)
                    arbiter_->acquire(ev.rt, want, got);
                for (int cpu : got)
                    bind_and_wake(ev.rt, cpu, t + sharing_->call_latency);
                int still = want - static_cast<int>(got.size());
                while (still > 0) {
                    int c = arbiter_->first_borrowed_out(ev.rt);
                    if (c < 0 || !arbiter_->reclaim(ev.rt, c))
                        break;
                    --still;
                }
            }
        }
    }
    schedule(t + config_.predictor.period, EvKind::Tick, ev.rt, -1);
}

TimeNs VirtualEngine::makespan(int r) const { return runtimes_[r]->makespan; }
const EventLog& VirtualEngine::log(int r) const { return runtimes_[r]->log; }
const Monitoring& VirtualEngine::monitoring(int r) const { return runtimes_[r]->mon; }
const CpuManager& VirtualEngine::cpu_manager(int r) const { return *runtimes_[r]->cm; }
int VirtualEngine::cpu_base(int r) const { return runtimes_[r]->cpu_base; }
int VirtualEngine::cpu_count(int r) const { return runtimes_[r]->n_own; }

} // namespace taskrt
