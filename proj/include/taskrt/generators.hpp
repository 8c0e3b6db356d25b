#pragma once

#include <cstdint>
#include <string>

#include "taskrt/types.hpp"

namespace taskrt {

enum class BenchKind {
    CholeskyDag,
    Multisaxpy,
    GaussSeidelBarrier,
    StreamLike,
    TwoPhaseFig1,
    FineGrainStress,
};

enum class Granularity { Fine, Coarse };

const char* bench_name(BenchKind k);
bool parse_bench(const std::string& name, BenchKind& out);

// Synthetic benchmark description. size_a/size_b default to per-kind values
// when left at zero:
//   cholesky_dag:        size_a = tiles per matrix dimension
//   multisaxpy:          size_a = chain depth (waves), size_b = width (blocks)
//   gauss_seidel_barrier: size_a = timesteps,          size_b = tasks per step
//   stream_like:         size_a = chain depth,         size_b = chain count
//   fine_grain_stress:   size_a = blocks,              size_b = waves per block
//   two_phase_fig1:      fixed shape (sizes ignored)
struct BenchmarkSpec {
    BenchKind kind = BenchKind::StreamLike;
    Granularity granularity = Granularity::Fine;
    int size_a = 0;
    int size_b = 0;
    double cost_scale = 1.0;
    double sigma = 0.1;   // lognormal duration noise; 0 = exact-linear
    double base_us = 1.0; // duration = base_us * cost * noise
};

// Deterministic task DAG for (spec, seed).
Workload generate(const BenchmarkSpec& spec, std::uint64_t seed);

// Closed-form tile-Cholesky task counts, used as the generator's oracle.
struct CholeskyCounts {
    std::int64_t potrf, trsm, syrk, gemm;
    std::int64_t total() const { return potrf + trsm + syrk + gemm; }
};
CholeskyCounts cholesky_counts(int tiles);

} // namespace taskrt
