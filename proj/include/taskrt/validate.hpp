#pragma once

#include <string>
#include <vector>

#include "taskrt/event_log.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

// Replays an event log against its workload and collects invariant
// violations. An empty result means the trace is coherent: every task ran
// exactly once through create/ready/start/end in order, no start preceded a
// dependency's end, no two tasks overlapped on one CPU, and park/resume
// (plus lend/reclaim hand-offs) alternate correctly per CPU.
// CPUs in [own_begin, own_end) start active; the rest (a peer's CPUs in a
// sharing run) start idle and must be acquired before use.
inline std::vector<std::string> validate_log(const EventLog& log, const Workload& wl,
                                             int total_cpus, int own_begin = 0,
                                             int own_end = -1)
{
    if (own_end < 0)
        own_end = total_cpus;
    std::vector<std::string> errs;
    auto fail = [&](size_t idx, const std::string& msg) {
        if (errs.size() < 50)
            errs.push_back("record " + std::to_string(idx) + ": " + msg);
    };

    size_t n = wl.tasks.size();
    std::vector<TimeNs> created(n, -1), readied(n, -1), started(n, -1), ended(n, -1);

    enum class CpuState { Active, Idle };
    std::vector<CpuState> cpu_state(total_cpus, CpuState::Idle);
    for (int c = own_begin; c < own_end && c < total_cpus; ++c)
        cpu_state[c] = CpuState::Active;
    std::vector<TaskId> cpu_task(total_cpus, kNoTask);
    std::vector<bool> cpu_seen(total_cpus, false);

    TimeNs prev_t = 0;
    const auto& recs = log.records();
    for (size_t i = 0; i < recs.size(); ++i) {
        const EventRecord& r = recs[i];
        if (r.time < prev_t)
            fail(i, "timestamps not monotonic");
        prev_t = r.time;

        if (r.kind == EventKind::Prediction)
            continue;

        bool task_event = r.kind == EventKind::Create || r.kind == EventKind::Ready ||
                          r.kind == EventKind::Start || r.kind == EventKind::End;
        if (task_event) {
            if (r.task >= n) {
                fail(i, "task id out of range");
                continue;
            }
        } else if (r.cpu < 0 || r.cpu >= total_cpus) {
            fail(i, "cpu id out of range");
            continue;
        }
        if (r.cpu >= 0 && r.cpu < total_cpus)
            cpu_seen[r.cpu] = true;

        switch (r.kind) {
        case EventKind::Create:
            if (created[r.task] >= 0)
                fail(i, "duplicate create");
            created[r.task] = r.time;
            if (wl.tasks[r.task].trigger != kNoTask) {
                TaskId trig = wl.tasks[r.task].trigger;
                if (ended[trig] < 0 || ended[trig] > r.time)
                    fail(i, "created before its trigger finished");
            }
            break;
        case EventKind::Ready:
            if (created[r.task] < 0 || created[r.task] > r.time)
                fail(i, "ready before create");
            if (readied[r.task] >= 0)
                fail(i, "duplicate ready");
            readied[r.task] = r.time;
            for (TaskId d : wl.tasks[r.task].deps)
                if (ended[d] < 0 || ended[d] > r.time)
                    fail(i, "ready before dependency end");
            break;
        case EventKind::Start:
            if (readied[r.task] < 0 || readied[r.task] > r.time)
                fail(i, "start before ready");
            if (started[r.task] >= 0)
                fail(i, "duplicate start");
            started[r.task] = r.time;
            if (cpu_state[r.cpu] == CpuState::Idle)
                fail(i, "start on an idle cpu");
            if (cpu_task[r.cpu] != kNoTask)
                fail(i, "start while another task runs on this cpu");
            cpu_task[r.cpu] = r.task;
            break;
        case EventKind::End:
            if (started[r.task] < 0 || started[r.task] > r.time)
                fail(i, "end before start");
            if (ended[r.task] >= 0)
                fail(i, "duplicate end");
            ended[r.task] = r.time;
            if (cpu_task[r.cpu] != r.task)
                fail(i, "end on a cpu that was not running this task");
            cpu_task[r.cpu] = kNoTask;
            break;
        case EventKind::Park:
        case EventKind::Lend:
            if (cpu_task[r.cpu] != kNoTask)
                fail(i, "cpu released mid-task");
            if (cpu_state[r.cpu] == CpuState::Idle)
                fail(i, "cpu released twice");
            cpu_state[r.cpu] = CpuState::Idle;
            break;
        case EventKind::Resume:
        case EventKind::Reclaim:
            if (cpu_state[r.cpu] == CpuState::Active)
                fail(i, "cpu activated twice");
            cpu_state[r.cpu] = CpuState::Active;
            break;
        case EventKind::Prediction:
            break;
        }
    }

    size_t finished = 0;
    for (size_t t = 0; t < n; ++t)
        if (ended[t] >= 0)
            finished++;
    if (finished != n && errs.size() < 50)
        errs.push_back("only " + std::to_string(finished) + " of " + std::to_string(n) +
                       " tasks finished");
    for (int c = 0; c < total_cpus; ++c)
        if (cpu_task[c] != kNoTask && errs.size() < 50)
            errs.push_back("cpu " + std::to_string(c) + " ends the trace mid-task");
    return errs;
}

} // namespace taskrt
