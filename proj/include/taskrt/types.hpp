#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace taskrt {

// All timestamps and durations are kept in integer nanoseconds internally.
// External interfaces (logs, CSVs, CLI) speak microseconds.
using TimeNs = std::int64_t;

constexpr TimeNs kMicrosecond = 1'000;

inline double to_us(TimeNs t) { return static_cast<double>(t) / 1e3; }
inline TimeNs from_us(double us) { return static_cast<TimeNs>(us * 1e3 + (us >= 0 ? 0.5 : -0.5)); }

using TaskId = std::uint32_t;
using TypeId = std::uint16_t;

constexpr TaskId kNoTask = std::numeric_limits<TaskId>::max();

enum class TaskStatus : std::uint8_t {
    Pending,    // registered in the graph but not yet created by its spawner
    Created,
    Ready,
    Executing,
    Finished,
};

struct TaskTypeInfo {
    std::string label;
};

// Static description of one task inside a generated workload. Dependencies
// must reference lower task ids, which makes every workload acyclic by
// construction and gives the engines a valid creation order for free.
struct TaskSpec {
    double cost = 0.0;          // user-declared cost units (C_i)
    TimeNs duration = 0;        // synthetic kernel duration
    TypeId type = 0;
    TaskId trigger = kNoTask;   // task whose completion spawns this one; kNoTask = spawned at startup
    TaskId parent = kNoTask;    // creator link used for predicted-time subtraction
    std::vector<TaskId> deps;
};

struct Workload {
    std::string name;
    std::vector<TaskTypeInfo> types;
    std::vector<TaskSpec> tasks;

    TaskId add(TypeId type, double cost, TimeNs duration, std::vector<TaskId> deps,
               TaskId trigger = kNoTask, TaskId parent = kNoTask)
    {
        TaskId id = static_cast<TaskId>(tasks.size());
        for (TaskId d : deps) {
            if (d >= id)
                throw std::invalid_argument("dependency must reference an earlier task");
        }
        if (cost < 0.0)
            throw std::invalid_argument("task cost must be nonnegative");
        tasks.push_back(TaskSpec{cost, duration, type, trigger, parent, std::move(deps)});
        return id;
    }

    TypeId add_type(std::string label)
    {
        types.push_back(TaskTypeInfo{std::move(label)});
        return static_cast<TypeId>(types.size() - 1);
    }
};

} // namespace taskrt
