#pragma once

#include <atomic>
#include <cassert>
#include <deque>
#include <mutex>
#include <vector>

#include "taskrt/types.hpp"

namespace taskrt {

enum class PolicyKind { Busy, Idle, Hybrid, Prediction };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Busy;
    int spin_budget = 100;      // hybrid: consecutive empty polls before parking
    bool single_resume = false; // strict pseudo-code fidelity: one resume per ADD
};

inline const char* policy_name(PolicyKind k)
{
    switch (k) {
    case PolicyKind::Busy: return "busy";
    case PolicyKind::Idle: return "idle";
    case PolicyKind::Hybrid: return "hybrid";
    case PolicyKind::Prediction: return "prediction";
    }
    return "?";
}

enum class PollVerdict { Spin, Park };

// Owns the active CPU count and the park/resume decisions for one runtime
// instance. The predictor publishes its target into an atomic; workers consult
// it on POLL, task insertion consults it on ADD. Corrections are one-sided:
// POLL only ever steps the active count down, ADD only ever steps it up.
class CpuManager {
public:
    // Threads beyond n_cpus (sharing mode spawns one per CPU of the combined
    // set) start parked, waiting for a borrowed CPU.
    CpuManager(int n_cpus, PolicyConfig policy, int n_threads = -1)
        : n_cpus_(n_cpus), policy_(policy), active_(n_cpus), target_(n_cpus)
    {
        if (n_threads < 0)
            n_threads = n_cpus;
        spin_counters_.assign(n_threads, 0);
        for (int t = n_cpus; t < n_threads; ++t)
            parked_.push_back(t);
    }

    PolicyKind kind() const { return policy_.kind; }
    const PolicyConfig& policy() const { return policy_; }

    void set_target(int delta) { target_.store(delta, std::memory_order_relaxed); }
    int target() const { return target_.load(std::memory_order_relaxed); }

    int active() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return active_;
    }

    std::int64_t parks() const { return parks_.load(std::memory_order_relaxed); }
    std::int64_t resumes() const { return resumes_.load(std::memory_order_relaxed); }

    // POLL action with an empty queue. A Park verdict means the manager has
    // already released the caller's CPU: the caller must stop polling until it
    // is handed back through a resume.
    PollVerdict on_empty_poll(int thread)
    {
        switch (policy_.kind) {
        case PolicyKind::Busy:
            return PollVerdict::Spin;
        case PolicyKind::Idle:
            park(thread);
            return PollVerdict::Park;
        case PolicyKind::Hybrid: {
            std::unique_lock<std::mutex> lk(mutex_);
            if (++spin_counters_[thread] < policy_.spin_budget)
                return PollVerdict::Spin;
            spin_counters_[thread] = 0;
            park_locked(thread);
            return PollVerdict::Park;
        }
        case PolicyKind::Prediction: {
            std::unique_lock<std::mutex> lk(mutex_);
            if (active_ > target_.load(std::memory_order_relaxed)) {
                park_locked(thread);
                return PollVerdict::Park;
            }
            return PollVerdict::Spin;
        }
        }
        return PollVerdict::Spin;
    }

    // A successful dequeue resets the hybrid spin counter.
    void on_dequeue(int thread)
    {
        if (policy_.kind == PolicyKind::Hybrid) {
            std::lock_guard<std::mutex> lk(mutex_);
            spin_counters_[thread] = 0;
        }
    }

    // ADD action after enqueuing `enqueued` tasks. Threads in `out` have been
    // reactivated (active count already stepped up) and must be woken by the
    // caller.
    void on_add(int enqueued, std::vector<int>& out)
    {
        switch (policy_.kind) {
        case PolicyKind::Busy:
            return;
        case PolicyKind::Idle:
        case PolicyKind::Hybrid: {
            std::lock_guard<std::mutex> lk(mutex_);
            int budget = policy_.single_resume ? 1 : enqueued;
            while (budget-- > 0 && !parked_.empty())
                out.push_back(resume_locked());
            return;
        }
        case PolicyKind::Prediction: {
            resume_toward_target(out);
            return;
        }
        }
    }

    // A fresh prediction behaves like a synthetic ADD so the active count can
    // grow even when no task insertion follows the target change.
    void on_publish(std::vector<int>& out)
    {
        if (policy_.kind == PolicyKind::Prediction)
            resume_toward_target(out);
    }

    // Sharing-mode helpers: a reclaimed CPU forces its worker out regardless
    // of verdicts, and an acquired CPU needs a specific parked thread back.
    void force_park(int thread)
    {
        park(thread);
    }

    int pop_parked()
    {
        std::lock_guard<std::mutex> lk(mutex_);
        if (parked_.empty())
            return -1;
        return resume_locked();
    }

    int parked_count() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return static_cast<int>(parked_.size());
    }

    // Undoes the caller's own park if no resumer popped it yet. Returns false
    // when a resume already happened, meaning a wakeup credit is pending.
    bool cancel_park(int thread)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        for (auto it = parked_.begin(); it != parked_.end(); ++it) {
            if (*it == thread) {
                parked_.erase(it);
                active_++;
                parks_.fetch_sub(1, std::memory_order_relaxed);
                return true;
            }
        }
        return false;
    }

private:
    void park(int thread)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        park_locked(thread);
    }

    void park_locked(int thread)
    {
        assert(active_ > 0);
        active_--;
        parked_.push_back(thread);
        parks_.fetch_add(1, std::memory_order_relaxed);
    }

    int resume_locked()
    {
        int thread = parked_.front();
        parked_.pop_front();
        active_++;
        resumes_.fetch_add(1, std::memory_order_relaxed);
        return thread;
    }

    void resume_toward_target(std::vector<int>& out)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        int limit = policy_.single_resume ? 1 : n_cpus_;
        while (limit-- > 0 && active_ < target_.load(std::memory_order_relaxed) && !parked_.empty())
            out.push_back(resume_locked());
    }

    int n_cpus_;
    PolicyConfig policy_;
    mutable std::mutex mutex_;
    int active_;
    std::atomic<int> target_;
    std::deque<int> parked_;
    std::vector<int> spin_counters_;
    std::atomic<std::int64_t> parks_{0};
    std::atomic<std::int64_t> resumes_{0};
};

} // namespace taskrt
