#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "taskrt/harness.hpp"
#include "taskrt/predictor.hpp"

namespace py = pybind11;
using namespace taskrt;

namespace {

RunConfig make_config(const std::string& bench, const std::string& policy,
                      const std::string& backend, int cpus, std::uint64_t seed, double sigma,
                      int size_a, int size_b, double cost_scale, double pred_rate_us,
                      double ema_decay, const std::string& share_with,
                      const std::string& share_policy)
{
    RunConfig cfg;
    if (!parse_bench(bench, cfg.bench.kind))
        throw py::value_error("unknown benchmark: " + bench);
    if (!parse_policy(policy, cfg.policy))
        throw py::value_error("unknown policy: " + policy);
    if (!parse_backend(backend, cfg.backend))
        throw py::value_error("unknown backend: " + backend);
    cfg.bench.sigma = sigma;
    cfg.bench.size_a = size_a;
    cfg.bench.size_b = size_b;
    cfg.bench.cost_scale = cost_scale;
    cfg.cpus = cpus;
    cfg.seed = seed;
    cfg.pred_rate_us = pred_rate_us;
    cfg.ema_decay = ema_decay;
    cfg.validate = cfg.backend == Backend::Virtual;
    if (!share_with.empty()) {
        BenchmarkSpec peer = cfg.bench;
        if (!parse_bench(share_with, peer.kind))
            throw py::value_error("unknown benchmark: " + share_with);
        cfg.share_bench = peer;
        if (!parse_sharing(share_policy, cfg.share_policy))
            throw py::value_error("unknown sharing policy: " + share_policy);
        if (cfg.backend != Backend::Virtual)
            throw py::value_error("sharing runs require the virtual backend");
    }
    return cfg;
}

py::dict runtime_dict(const RuntimeResult& rr)
{
    py::dict d;
    d["bench"] = rr.bench;
    d["makespan_us"] = rr.makespan_us;
    d["energy"] = rr.energy.energy;
    d["edp"] = rr.energy.edp;
    d["parks"] = rr.parks;
    d["resumes"] = rr.resumes;
    d["arbiter_calls"] = rr.arbiter.total_calls();
    if (rr.accuracy.global.available)
        d["accuracy_pct"] = rr.accuracy.global.avg_accuracy_pct;
    else
        d["accuracy_pct"] = py::none();
    d["task_instances"] = rr.accuracy.global.instances;
    return d;
}

} // namespace

PYBIND11_MODULE(_taskrt, m)
{
    m.doc() = "Task-parallel runtime simulator: benchmark generators, policy "
              "engines and the CPU-count predictor.";

    m.def("benchmarks", []() {
        std::vector<std::string> names;
        for (BenchKind k : {BenchKind::CholeskyDag, BenchKind::Multisaxpy,
                            BenchKind::GaussSeidelBarrier, BenchKind::StreamLike,
                            BenchKind::TwoPhaseFig1, BenchKind::FineGrainStress})
            names.push_back(bench_name(k));
        return names;
    });

    m.def(
        "task_count",
        [](const std::string& bench, std::uint64_t seed, int size_a, int size_b) {
            BenchmarkSpec spec;
            if (!parse_bench(bench, spec.kind))
                throw py::value_error("unknown benchmark: " + bench);
            spec.size_a = size_a;
            spec.size_b = size_b;
            return generate(spec, seed).tasks.size();
        },
        py::arg("bench"), py::arg("seed") = 1, py::arg("size_a") = 0, py::arg("size_b") = 0,
        "Number of tasks the generator emits for this configuration.");

    m.def(
        "predict_cpus",
        [](const std::vector<std::tuple<double, double, std::int64_t, double, std::int64_t>>&
               types,
           double period_us, int n_cpus, bool allow_zero) {
            std::vector<TypeSnapshot> snap;
            for (const auto& [ready, exec, live, alpha, obs] : types) {
                TypeSnapshot s;
                s.ready_cost = ready;
                s.exec_cost = exec;
                s.live = live;
                s.alpha = alpha;
                s.observations = obs;
                snap.push_back(s);
            }
            return get_cpu_prediction(snap, from_us(period_us), n_cpus, allow_zero).target_cpus;
        },
        py::arg("types"), py::arg("period_us") = 50.0, py::arg("n_cpus") = 8,
        py::arg("allow_zero") = false,
        "Target CPU count for type tuples (ready_cost, exec_cost, live, alpha, observations).");

    m.def(
        "run",
        [](const std::string& bench, const std::string& policy, const std::string& backend,
           int cpus, std::uint64_t seed, double sigma, int size_a, int size_b, double cost_scale,
           double pred_rate_us, double ema_decay, const std::string& share_with,
           const std::string& share_policy) {
            RunConfig cfg = make_config(bench, policy, backend, cpus, seed, sigma, size_a, size_b,
                                        cost_scale, pred_rate_us, ema_decay, share_with,
                                        share_policy);
            RunResult r = run_single(cfg);
            py::dict d;
            d["run_id"] = r.run_id;
            py::list rts;
            for (const RuntimeResult& rr : r.runtimes)
                rts.append(runtime_dict(rr));
            d["runtimes"] = rts;
            d["makespan_us"] = r.primary().makespan_us;
            d["energy"] = r.primary().energy.energy;
            d["edp"] = r.primary().energy.edp;
            return d;
        },
        py::arg("bench"), py::arg("policy") = "busy", py::arg("backend") = "virtual",
        py::arg("cpus") = 8, py::arg("seed") = 1, py::arg("sigma") = 0.1, py::arg("size_a") = 0,
        py::arg("size_b") = 0, py::arg("cost_scale") = 1.0, py::arg("pred_rate_us") = 50.0,
        py::arg("ema_decay") = 0.5, py::arg("share_with") = std::string(),
        py::arg("share_policy") = "lewi",
        "Execute one benchmark run and return its headline metrics.");
}
