#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "taskrt/types.hpp"

namespace taskrt {

struct Spinlock {
    std::atomic_flag flag = ATOMIC_FLAG_INIT;
    void lock()
    {
        while (flag.test_and_set(std::memory_order_acquire))
            while (flag.test(std::memory_order_relaxed)) { }
    }
    void unlock() { flag.clear(std::memory_order_release); }
};

struct TypeSnapshot {
    double ready_cost = 0.0;      // W_ready in cost units
    double exec_cost = 0.0;       // W_executing in cost units
    std::int64_t live = 0;        // M: ready + executing instances
    double alpha = 0.0;           // unitary cost, us per cost unit
    std::int64_t observations = 0;
    bool has_alpha() const { return observations > 0; }
};

struct AccuracyRow {
    std::string task_type;
    std::int64_t instances = 0;
    double avg_accuracy_pct = 0.0;
    bool available = false;       // false renders as NA
};

struct AccuracyReport {
    std::vector<AccuracyRow> per_type;
    AccuracyRow global;
};

// Per-task-type timing statistics: unitary-cost EMAs, per-status workloads and
// live instance counts, plus the parent-child predicted-time ledger. Hooks are
// callable from any worker thread; each type is guarded by its own spinlock so
// a snapshot reads every type coherently.
class Monitoring {
public:
    Monitoring(const Workload& wl, double ema_decay = 0.5, bool enabled = true)
        : workload_(&wl), lambda_(ema_decay), enabled_(enabled),
          entries_(std::make_unique<Entry[]>(wl.types.size())), n_types_(wl.types.size())
    {
        if (enabled_) {
            predicted_us_.assign(wl.tasks.size(), -1.0);
            remaining_us_.assign(wl.tasks.size(), -1.0);
            exec_contrib_.assign(wl.tasks.size(), -1.0);
        }
    }

    bool enabled() const { return enabled_; }
    double ema_decay() const { return lambda_; }

    void on_create(TaskId id)
    {
        if (!enabled_)
            return;
        const TaskSpec& t = workload_->tasks[id];
        Entry& e = entries_[t.type];
        e.lock.lock();
        bool predictable = e.observations > 0;
        double alpha = e.alpha;
        e.lock.unlock();
        if (predictable) {
            double predicted = t.cost * alpha;
            predicted_us_[id] = predicted;
            remaining_us_[id] = predicted;
        }
    }

    void on_ready(TaskId id)
    {
        if (!enabled_)
            return;
        const TaskSpec& t = workload_->tasks[id];
        Entry& e = entries_[t.type];
        e.lock.lock();
        e.ready_cost += t.cost;
        e.live++;
        e.lock.unlock();
    }

    void on_start(TaskId id)
    {
        if (!enabled_)
            return;
        const TaskSpec& t = workload_->tasks[id];
        Entry& e = entries_[t.type];
        e.lock.lock();
        e.ready_cost = std::max(0.0, e.ready_cost - t.cost);
        e.exec_cost += t.cost;
        e.lock.unlock();
        exec_contrib_[id] = t.cost;
    }

    void on_finish(TaskId id, TimeNs execution_time)
    {
        if (!enabled_)
            return;
        const TaskSpec& t = workload_->tasks[id];
        double exec_us = to_us(execution_time);
        Entry& e = entries_[t.type];
        e.lock.lock();
        double contrib = exec_contrib_[id];
        if (contrib > 0.0)
            e.exec_cost = std::max(0.0, e.exec_cost - contrib);
        e.live--;
        e.finished++;
        if (t.cost > 0.0) {
            double ratio = exec_us / t.cost;
            if (e.observations == 0) {
                e.alpha = ratio;
                e.min_ratio = e.max_ratio = ratio;
            } else {
                e.alpha = lambda_ * ratio + (1.0 - lambda_) * e.alpha;
                e.min_ratio = std::min(e.min_ratio, ratio);
                e.max_ratio = std::max(e.max_ratio, ratio);
            }
            e.observations++;
        }
        if (predicted_us_[id] >= 0.0) {
            double acc = accuracy(predicted_us_[id], exec_us);
            e.accuracy_sum += acc;
            e.accuracy_count++;
        }
        e.lock.unlock();
        exec_contrib_[id] = -1.0;
        if (t.parent != kNoTask)
            subtract_from_parent(t.parent, exec_us);
    }

    // Symmetric relative-error complement, bounded in [0, 100].
    static double accuracy(double predicted, double actual)
    {
        double hi = std::max(predicted, actual);
        if (hi <= 0.0)
            return 100.0;
        return 100.0 * (1.0 - std::abs(predicted - actual) / hi);
    }

    void snapshot(std::vector<TypeSnapshot>& out) const
    {
        out.resize(n_types_);
        for (size_t i = 0; i < n_types_; ++i) {
            Entry& e = const_cast<Entry&>(entries_[i]);
            e.lock.lock();
            out[i].ready_cost = e.ready_cost;
            out[i].exec_cost = e.exec_cost;
            out[i].live = e.live;
            out[i].alpha = e.alpha;
            out[i].observations = e.observations;
            e.lock.unlock();
        }
    }

    AccuracyReport accuracy_report() const
    {
        AccuracyReport rep;
        double sum = 0.0;
        std::int64_t count = 0;
        std::int64_t instances = 0;
        for (size_t i = 0; i < n_types_; ++i) {
            const Entry& e = entries_[i];
            AccuracyRow row;
            row.task_type = workload_->types[i].label;
            row.instances = e.finished;
            row.available = e.accuracy_count > 0;
            if (row.available)
                row.avg_accuracy_pct = e.accuracy_sum / static_cast<double>(e.accuracy_count);
            rep.per_type.push_back(row);
            sum += e.accuracy_sum;
            count += e.accuracy_count;
            instances += e.finished;
        }
        rep.global.task_type = "total";
        rep.global.instances = instances;
        rep.global.available = count > 0;
        if (rep.global.available)
            rep.global.avg_accuracy_pct = sum / static_cast<double>(count);
        return rep;
    }

    double predicted_time_us(TaskId id) const
    {
        return enabled_ ? predicted_us_[id] : -1.0;
    }

    double remaining_time_us(TaskId id) const
    {
        return enabled_ ? remaining_us_[id] : -1.0;
    }

    // Observed unitary-cost hull for a type; valid once observations > 0.
    void ratio_hull(TypeId type, double& lo, double& hi) const
    {
        lo = entries_[type].min_ratio;
        hi = entries_[type].max_ratio;
    }

private:
    struct Entry {
        mutable Spinlock lock;
        double ready_cost = 0.0;
        double exec_cost = 0.0;
        std::int64_t live = 0;
        double alpha = 0.0;
        std::int64_t observations = 0;
        std::int64_t finished = 0;
        double min_ratio = 0.0;
        double max_ratio = 0.0;
        double accuracy_sum = 0.0;
        std::int64_t accuracy_count = 0;
    };

    // A finished child pays its execution time off the parent's remaining
    // predicted time and, while the parent is executing, off the parent's
    // contribution to the executing workload.
    void subtract_from_parent(TaskId parent, double exec_us)
    {
        if (remaining_us_[parent] < 0.0)
            return; // parent had no timing prediction
        const TaskSpec& p = workload_->tasks[parent];
        Entry& e = entries_[p.type];
        e.lock.lock();
        double dec = std::min(remaining_us_[parent], exec_us);
        remaining_us_[parent] -= dec;
        if (exec_contrib_[parent] >= 0.0 && e.alpha > 0.0) {
            double dcost = std::min(exec_contrib_[parent], dec / e.alpha);
            exec_contrib_[parent] -= dcost;
            e.exec_cost = std::max(0.0, e.exec_cost - dcost);
        }
        e.lock.unlock();
    }

    const Workload* workload_;
    double lambda_;
    bool enabled_;
    std::unique_ptr<Entry[]> entries_;
    size_t n_types_ = 0;
    std::vector<double> predicted_us_;
    std::vector<double> remaining_us_;
    std::vector<double> exec_contrib_;
};

} // namespace taskrt
