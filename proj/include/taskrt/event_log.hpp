#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "taskrt/types.hpp"

namespace taskrt {

enum class EventKind : std::uint8_t {
    Create,
    Ready,
    Start,
    End,
    Park,
    Resume,
    Lend,
    Reclaim,
    Prediction,
};

inline const char* event_name(EventKind k)
{
    switch (k) {
    case EventKind::Create: return "create";
    case EventKind::Ready: return "ready";
    case EventKind::Start: return "start";
    case EventKind::End: return "end";
    case EventKind::Park: return "park";
    case EventKind::Resume: return "resume";
    case EventKind::Lend: return "lend";
    case EventKind::Reclaim: return "reclaim";
    case EventKind::Prediction: return "prediction";
    }
    return "?";
}

struct EventRecord {
    TimeNs time = 0;
    EventKind kind = EventKind::Create;
    std::int16_t cpu = -1;
    std::int16_t thread = -1;
    TaskId task = kNoTask;    // for Prediction records this carries the published target
    TypeId type = 0;
    bool has_type = false;
};

// Per-run event trace. Prediction records keep their per-type contributions in
// a side table indexed by the record's task field position.
class EventLog {
public:
    void reserve(size_t n) { records_.reserve(n); }

    void log(TimeNs t, EventKind k, int cpu, int thread, TaskId task, TypeId type, bool has_type)
    {
        records_.push_back(EventRecord{t, k, static_cast<std::int16_t>(cpu),
                                       static_cast<std::int16_t>(thread), task, type, has_type});
    }

    void log_task(TimeNs t, EventKind k, int cpu, int thread, TaskId task, TypeId type)
    {
        log(t, k, cpu, thread, task, type, true);
    }

    void log_cpu(TimeNs t, EventKind k, int cpu, int thread)
    {
        log(t, k, cpu, thread, kNoTask, 0, false);
    }

    void log_prediction(TimeNs t, int target, std::vector<std::pair<TypeId, double>> contributions)
    {
        EventRecord r;
        r.time = t;
        r.kind = EventKind::Prediction;
        r.task = static_cast<TaskId>(target);
        records_.push_back(r);
        contributions_.emplace_back(records_.size() - 1, std::move(contributions));
    }

    const std::vector<EventRecord>& records() const { return records_; }

    // Newline-delimited dump: timestamp_us,event,cpu,thread,task,task_type
    void dump(std::ostream& os, const std::vector<TaskTypeInfo>& types) const
    {
        size_t contrib_idx = 0;
        char buf[128];
        for (size_t i = 0; i < records_.size(); ++i) {
            const EventRecord& r = records_[i];
            int n = std::snprintf(buf, sizeof(buf), "%lld.%03lld,%s,",
                                  static_cast<long long>(r.time / 1000),
                                  static_cast<long long>(r.time % 1000), event_name(r.kind));
            os.write(buf, n);
            if (r.cpu >= 0)
                os << r.cpu;
            else
                os << '-';
            os << ',';
            if (r.thread >= 0)
                os << r.thread;
            else
                os << '-';
            os << ',';
            if (r.kind == EventKind::Prediction) {
                os << r.task << ',';
                while (contrib_idx < contributions_.size() && contributions_[contrib_idx].first < i)
                    ++contrib_idx;
                if (contrib_idx < contributions_.size() && contributions_[contrib_idx].first == i) {
                    const auto& cs = contributions_[contrib_idx].second;
                    for (size_t c = 0; c < cs.size(); ++c) {
                        int m = std::snprintf(buf, sizeof(buf), "%s%s=%.6g",
                                              c ? ";" : "", types[cs[c].first].label.c_str(), cs[c].second);
                        os.write(buf, m);
                    }
                    if (cs.empty())
                        os << '-';
                    ++contrib_idx;
                } else {
                    os << '-';
                }
            } else {
                if (r.task != kNoTask)
                    os << r.task;
                else
                    os << '-';
                os << ',';
                if (r.has_type)
                    os << types[r.type].label;
                else
                    os << '-';
            }
            os << '\n';
        }
    }

    size_t size() const { return records_.size(); }
    void clear() { records_.clear(); contributions_.clear(); }

private:
    std::vector<EventRecord> records_;
    std::vector<std::pair<size_t, std::vector<std::pair<TypeId, double>>>> contributions_;
};

} // namespace taskrt
