#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "taskrt/monitoring.hpp"
#include "taskrt/types.hpp"

namespace taskrt {

struct PredictorConfig {
    TimeNs period = 50 * kMicrosecond; // prediction rate f
    bool allow_zero = false;           // lower clamp becomes 0 when set
};

struct Prediction {
    int target_cpus = 1;
    TimeNs timestamp = 0;
    std::vector<std::pair<TypeId, double>> contributions; // per-type beta (or count fallback)
};

// Optimal CPU count for the next period. Types are folded in creation order
// and the accumulation stops early once it already covers every CPU. Types
// without a unitary-cost observation contribute their live instance count.
inline Prediction get_cpu_prediction(std::span<const TypeSnapshot> snapshot,
                                     TimeNs period, int n_cpus,
                                     bool allow_zero = false, TimeNs timestamp = 0)
{
    Prediction p;
    p.timestamp = timestamp;
    double gamma = 0.0;
    double f_us = to_us(period);
    std::int64_t total_live = 0;
    for (const TypeSnapshot& s : snapshot)
        total_live += s.live;
    for (size_t j = 0; j < snapshot.size(); ++j) {
        if (gamma >= static_cast<double>(n_cpus))
            break;
        const TypeSnapshot& s = snapshot[j];
        double beta;
        if (s.has_alpha())
            beta = (s.ready_cost + s.exec_cost) * s.alpha / f_us;
        else
            beta = static_cast<double>(s.live);
        if (beta != 0.0)
            p.contributions.emplace_back(static_cast<TypeId>(j), beta);
        gamma += beta;
    }
    double delta = std::min(std::ceil(gamma), static_cast<double>(total_live));
    int lo = allow_zero ? 0 : 1;
    p.target_cpus = static_cast<int>(std::clamp(delta, static_cast<double>(lo),
                                                static_cast<double>(n_cpus)));
    return p;
}

} // namespace taskrt
