#include "taskrt/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace taskrt {

const char* bench_name(BenchKind k)
{
    switch (k) {
    case BenchKind::CholeskyDag: return "cholesky_dag";
    case BenchKind::Multisaxpy: return "multisaxpy";
    case BenchKind::GaussSeidelBarrier: return "gauss_seidel_barrier";
    case BenchKind::StreamLike: return "stream_like";
    case BenchKind::TwoPhaseFig1: return "two_phase_fig1";
    case BenchKind::FineGrainStress: return "fine_grain_stress";
    }
    return "?";
}

bool parse_bench(const std::string& name, BenchKind& out)
{
    for (BenchKind k : {BenchKind::CholeskyDag, BenchKind::Multisaxpy,
                        BenchKind::GaussSeidelBarrier, BenchKind::StreamLike,
                        BenchKind::TwoPhaseFig1, BenchKind::FineGrainStress}) {
        if (name == bench_name(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

CholeskyCounts cholesky_counts(int tiles)
{
    std::int64_t n = tiles;
    return CholeskyCounts{n, n * (n - 1) / 2, n * (n - 1) / 2, n * (n - 1) * (n - 2) / 6};
}

namespace {

class DurationLaw {
public:
    DurationLaw(const BenchmarkSpec& spec, std::uint64_t seed)
        : base_us_(spec.base_us), sigma_(spec.sigma), rng_(seed ^ 0x9e3779b97f4a7c15ull),
          dist_(-0.5 * spec.sigma * spec.sigma, spec.sigma > 0.0 ? spec.sigma : 1.0)
    {
    }

    TimeNs operator()(double cost)
    {
        double noise = sigma_ > 0.0 ? std::exp(dist_(rng_)) : 1.0;
        return static_cast<TimeNs>(std::llround(base_us_ * cost * noise * 1e3));
    }

private:
    double base_us_;
    double sigma_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> dist_;
};

void require(bool ok, const char* what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

Workload gen_cholesky(const BenchmarkSpec& spec, std::uint64_t seed)
{
    int n = spec.size_a > 0 ? spec.size_a
                            : (spec.granularity == Granularity::Fine ? 20 : 8);
    require(n >= 2, "cholesky_dag: tiles must be >= 2");
    double tile = (spec.granularity == Granularity::Fine ? 50.0 : 400.0) * spec.cost_scale;

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId potrf = wl.add_type("potrf");
    TypeId trsm = wl.add_type("trsm");
    TypeId syrk = wl.add_type("syrk");
    TypeId gemm = wl.add_type("gemm");
    DurationLaw law(spec, seed);

    auto at = [n](int i, int j) { return i * n + j; };
    std::vector<TaskId> writer(static_cast<size_t>(n) * n, kNoTask);
    std::vector<TaskId> potrf_ids(n, kNoTask);

    auto emit = [&](TypeId type, double cost, std::vector<TaskId> deps, TaskId trigger) {
        return wl.add(type, cost, law(cost), std::move(deps), trigger);
    };

    for (int k = 0; k < n; ++k) {
        // Iteration k's tasks spring into existence when panel k-1 is done.
        TaskId trigger = k > 0 ? potrf_ids[k - 1] : kNoTask;
        std::vector<TaskId> deps;
        if (writer[at(k, k)] != kNoTask)
            deps.push_back(writer[at(k, k)]);
        TaskId pk = emit(potrf, tile / 3.0, deps, trigger);
        potrf_ids[k] = pk;
        writer[at(k, k)] = pk;

        std::vector<TaskId> trsm_ids(n, kNoTask);
        for (int i = k + 1; i < n; ++i) {
            deps = {pk};
            if (writer[at(i, k)] != kNoTask)
                deps.push_back(writer[at(i, k)]);
            trsm_ids[i] = emit(trsm, tile, deps, trigger);
            writer[at(i, k)] = trsm_ids[i];
        }
        for (int i = k + 1; i < n; ++i) {
            deps = {trsm_ids[i]};
            if (writer[at(i, i)] != kNoTask)
                deps.push_back(writer[at(i, i)]);
            writer[at(i, i)] = emit(syrk, tile, deps, trigger);
            for (int j = i + 1; j < n; ++j) {
                deps = {trsm_ids[i], trsm_ids[j]};
                if (writer[at(j, i)] != kNoTask)
                    deps.push_back(writer[at(j, i)]);
                writer[at(j, i)] = emit(gemm, 2.0 * tile, deps, trigger);
            }
        }
    }
    return wl;
}

Workload gen_multisaxpy(const BenchmarkSpec& spec, std::uint64_t seed)
{
    bool fine = spec.granularity == Granularity::Fine;
    int depth = spec.size_a > 0 ? spec.size_a : (fine ? 400 : 300);
    int width = spec.size_b > 0 ? spec.size_b : (fine ? 256 : 64);
    require(depth >= 1 && width >= 1, "multisaxpy: depth and width must be >= 1");
    double cost = (fine ? 5.0 : 100.0) * spec.cost_scale;

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId saxpy = wl.add_type("saxpy");
    DurationLaw law(spec, seed);

    // Block i of wave w only touches block i of wave w-1: independent chains.
    std::vector<TaskId> prev(width, kNoTask);
    for (int w = 0; w < depth; ++w) {
        for (int i = 0; i < width; ++i) {
            std::vector<TaskId> deps;
            if (prev[i] != kNoTask)
                deps.push_back(prev[i]);
            prev[i] = wl.add(saxpy, cost, law(cost), std::move(deps), prev[i]);
        }
    }
    return wl;
}

Workload gen_barrier_waves(const BenchmarkSpec& spec, std::uint64_t seed,
                           const char* task_label, int def_waves, int def_width,
                           double cost_lo, double cost_hi, double barrier_cost)
{
    int waves = spec.size_a > 0 ? spec.size_a : def_waves;
    int width = spec.size_b > 0 ? spec.size_b : def_width;
    require(waves >= 1 && width >= 1, "waves and width must be >= 1");

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId work = wl.add_type(task_label);
    TypeId barrier = wl.add_type("barrier");
    DurationLaw law(spec, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cost_dist(cost_lo, cost_hi);

    TaskId prev_barrier = kNoTask;
    for (int w = 0; w < waves; ++w) {
        std::vector<TaskId> wave;
        wave.reserve(width);
        for (int i = 0; i < width; ++i) {
            double cost = (cost_lo == cost_hi ? cost_lo : cost_dist(rng)) * spec.cost_scale;
            std::vector<TaskId> deps;
            if (prev_barrier != kNoTask)
                deps.push_back(prev_barrier);
            wave.push_back(wl.add(work, cost, law(cost), std::move(deps), prev_barrier));
        }
        double bc = barrier_cost * spec.cost_scale;
        prev_barrier = wl.add(barrier, bc, law(bc), std::move(wave), prev_barrier);
    }
    return wl;
}

// Independent equal-cost chains with no synchronization between them: the
// parallelism is flat at the chain count for the whole run.
Workload gen_stream_chains(const BenchmarkSpec& spec, std::uint64_t seed)
{
    int depth = spec.size_a > 0 ? spec.size_a : 50;
    int chains = spec.size_b > 0 ? spec.size_b : 256;
    require(depth >= 1 && chains >= 1, "stream_like: depth and chains must be >= 1");
    double cost = 50.0 * spec.cost_scale;

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId work = wl.add_type("stream_task");
    DurationLaw law(spec, seed);

    for (int c = 0; c < chains; ++c) {
        TaskId prev = kNoTask;
        for (int d = 0; d < depth; ++d) {
            std::vector<TaskId> deps;
            if (prev != kNoTask)
                deps.push_back(prev);
            prev = wl.add(work, cost, law(cost), std::move(deps), prev);
        }
    }
    return wl;
}

Workload gen_two_phase(const BenchmarkSpec& spec, std::uint64_t seed)
{
    // Phase alpha: six parallel chains. Phase beta: four chains plus a fifth
    // present every other segment, averaging four and a half active CPUs.
    constexpr int kAlphaDepth = 30;
    constexpr int kSegments = 20;
    constexpr int kSegmentTasks = 5;
    double cost = 100.0 * spec.cost_scale;

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId work = wl.add_type("work");
    DurationLaw law(spec, seed);

    auto chain_task = [&](TaskId prev) {
        std::vector<TaskId> deps;
        if (prev != kNoTask)
            deps.push_back(prev);
        return wl.add(work, cost, law(cost), std::move(deps), prev);
    };

    std::vector<TaskId> tip(6, kNoTask);
    std::vector<TaskId> spine; // chain 0, indexed by depth
    for (int d = 0; d < kAlphaDepth; ++d)
        for (int c = 0; c < 6; ++c) {
            tip[c] = chain_task(tip[c]);
            if (c == 0)
                spine.push_back(tip[0]);
        }
    for (int d = 0; d < kSegments * kSegmentTasks; ++d)
        for (int c = 0; c < 4; ++c) {
            tip[c] = chain_task(tip[c]);
            if (c == 0)
                spine.push_back(tip[0]);
        }
    for (int s = 0; s < kSegments; s += 2) {
        TaskId prev = spine[kAlphaDepth + s * kSegmentTasks - 1];
        for (int d = 0; d < kSegmentTasks; ++d)
            prev = chain_task(prev);
    }
    return wl;
}

// Blocks alternate a parallel section (wide barrier-separated waves of
// 1-10 us tasks) with a serial section (one chain of 10 us tasks). The wide
// waves punish eager parking, the serial chains punish never parking.
Workload gen_fine_grain_stress(const BenchmarkSpec& spec, std::uint64_t seed)
{
    int blocks = spec.size_a > 0 ? spec.size_a : 98;
    int waves = spec.size_b > 0 ? spec.size_b : 20;
    require(blocks >= 1 && waves >= 1, "fine_grain_stress: blocks and waves must be >= 1");
    constexpr int kWidth = 512;
    constexpr int kChainDepth = 50;

    Workload wl;
    wl.name = bench_name(spec.kind);
    TypeId fg = wl.add_type("fg");
    TypeId serial = wl.add_type("serial");
    TypeId barrier = wl.add_type("barrier");
    DurationLaw law(spec, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cost_dist(1.0, 8.0);

    TaskId gate = kNoTask;
    for (int b = 0; b < blocks; ++b) {
        for (int w = 0; w < waves; ++w) {
            std::vector<TaskId> wave;
            wave.reserve(kWidth);
            for (int i = 0; i < kWidth; ++i) {
                double cost = cost_dist(rng) * spec.cost_scale;
                std::vector<TaskId> deps;
                if (gate != kNoTask)
                    deps.push_back(gate);
                wave.push_back(wl.add(fg, cost, law(cost), std::move(deps), gate));
            }
            gate = wl.add(barrier, 0.0, 0, std::move(wave), gate);
        }
        for (int d = 0; d < kChainDepth; ++d) {
            double cost = 10.0 * spec.cost_scale;
            gate = wl.add(serial, cost, law(cost), {gate}, gate);
        }
    }
    return wl;
}

} // namespace

Workload generate(const BenchmarkSpec& spec, std::uint64_t seed)
{
    require(spec.size_a >= 0 && spec.size_b >= 0, "benchmark sizes must be nonnegative");
    require(spec.cost_scale > 0.0, "cost_scale must be positive");
    require(spec.sigma >= 0.0, "sigma must be nonnegative");
    require(spec.base_us > 0.0, "base_us must be positive");
    switch (spec.kind) {
    case BenchKind::CholeskyDag:
        return gen_cholesky(spec, seed);
    case BenchKind::Multisaxpy:
        return gen_multisaxpy(spec, seed);
    case BenchKind::GaussSeidelBarrier:
        return gen_barrier_waves(spec, seed, "gs_task", 100, 256, 100.0, 500.0, 0.0);
    case BenchKind::StreamLike:
        return gen_stream_chains(spec, seed);
    case BenchKind::TwoPhaseFig1:
        return gen_two_phase(spec, seed);
    case BenchKind::FineGrainStress:
        return gen_fine_grain_stress(spec, seed);
    }
    throw std::invalid_argument("unknown benchmark kind");
}

} // namespace taskrt
