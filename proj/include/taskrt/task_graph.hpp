#pragma once

#include <cassert>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "taskrt/types.hpp"

namespace taskrt {

struct TaskRecord {
    TimeNs start = -1;
    TimeNs end = -1;
    TimeNs execution_time() const { return end - start; }
};

// Task registry, dependency tracking and the ready queue. All mutating
// operations are serialized by an internal mutex so worker threads can call
// them directly. The ready hook fires while the lock is held, before the task
// becomes visible in the queue, so observers see ready -> start in order.
class TaskGraph {
public:
    explicit TaskGraph(const Workload& wl)
        : workload_(&wl)
    {
        size_t n = wl.tasks.size();
        status_.assign(n, TaskStatus::Pending);
        unfinished_deps_.assign(n, 0);
        records_.resize(n);
        dependents_offsets_.assign(n + 1, 0);
        for (const TaskSpec& t : wl.tasks)
            for (TaskId d : t.deps)
                dependents_offsets_[d + 1]++;
        for (size_t i = 1; i <= n; ++i)
            dependents_offsets_[i] += dependents_offsets_[i - 1];
        dependents_.resize(wl.tasks.empty() ? 0 : dependents_offsets_[n]);
        std::vector<std::uint32_t> cursor(dependents_offsets_.begin(), dependents_offsets_.end() - 1);
        for (TaskId id = 0; id < n; ++id) {
            unfinished_deps_[id] = static_cast<std::uint32_t>(wl.tasks[id].deps.size());
            for (TaskId d : wl.tasks[id].deps)
                dependents_[cursor[d]++] = id;
        }
    }

    void set_ready_hook(std::function<void(TaskId)> hook) { ready_hook_ = std::move(hook); }

    const TaskSpec& spec(TaskId id) const { return workload_->tasks[id]; }
    size_t size() const { return status_.size(); }

    // Moves a pending task to created; enqueues it if its dependencies are
    // already satisfied. Returns true when the task became ready.
    bool create(TaskId id)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        assert(status_[id] == TaskStatus::Pending);
        status_[id] = TaskStatus::Created;
        created_count_++;
        if (unfinished_deps_[id] == 0) {
            make_ready(id);
            return true;
        }
        return false;
    }

    std::optional<TaskId> pop_ready()
    {
        std::lock_guard<std::mutex> lk(mutex_);
        if (ready_queue_.empty())
            return std::nullopt;
        TaskId id = ready_queue_.front();
        ready_queue_.pop_front();
        return id;
    }

    void start(TaskId id, TimeNs now)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        assert(status_[id] == TaskStatus::Ready);
        status_[id] = TaskStatus::Executing;
        records_[id].start = now;
    }

    // Finishes a task and releases dependents whose last dependency this was.
    // Released tasks are enqueued before the call returns; their ids are also
    // returned so the caller can fire ADD actions. Completing a task that is
    // not executing is an invariant breach.
    std::vector<TaskId> complete(TaskId id, TimeNs now)
    {
        std::vector<TaskId> released;
        std::lock_guard<std::mutex> lk(mutex_);
        if (status_[id] != TaskStatus::Executing)
            throw std::logic_error("complete_task: task is not executing");
        status_[id] = TaskStatus::Finished;
        records_[id].end = now;
        finished_count_++;
        for (std::uint32_t i = dependents_offsets_[id]; i < dependents_offsets_[id + 1]; ++i) {
            TaskId dep = dependents_[i];
            assert(unfinished_deps_[dep] > 0);
            if (--unfinished_deps_[dep] == 0 && status_[dep] == TaskStatus::Created) {
                make_ready(dep);
                released.push_back(dep);
            }
        }
        return released;
    }

    TaskStatus status(TaskId id) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return status_[id];
    }

    const TaskRecord& record(TaskId id) const { return records_[id]; }

    size_t finished_count() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return finished_count_;
    }

    bool all_finished() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return finished_count_ == status_.size();
    }

    size_t ready_count() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return ready_queue_.size();
    }

    size_t ready_transitions() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return ready_transitions_;
    }

private:
    void make_ready(TaskId id)
    {
        status_[id] = TaskStatus::Ready;
        ready_transitions_++;
        if (ready_hook_)
            ready_hook_(id);
        ready_queue_.push_back(id);
    }

    const Workload* workload_;
    mutable std::mutex mutex_;
    std::vector<TaskStatus> status_;
    std::vector<std::uint32_t> unfinished_deps_;
    std::vector<TaskRecord> records_;
    // CSR adjacency of dependents, built once at construction.
    std::vector<std::uint32_t> dependents_offsets_;
    std::vector<TaskId> dependents_;
    std::deque<TaskId> ready_queue_;
    std::function<void(TaskId)> ready_hook_;
    size_t created_count_ = 0;
    size_t finished_count_ = 0;
    size_t ready_transitions_ = 0;
};

} // namespace taskrt
