#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "taskrt/harness.hpp"

using namespace taskrt;

namespace {

// Flat key=value config file; '#' starts a comment. Values feed the same
// parser as the command line, with explicit flags taking precedence.
std::vector<std::string> load_config_args(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw CLI::ValidationError("--config", "cannot open " + path);
    std::vector<std::string> args;
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty())
            args.push_back("--" + key + "=" + val);
    }
    return args;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"task-parallel runtime benchmark driver"};

    std::string bench = "stream_like", policy = "busy", backend = "virtual";
    std::string gran = "fine", share_with, share_policy = "lewi", out_dir, config_path;
    int cpus = 8, reps = 1, spin_budget = 100, size_a = 0, size_b = 0;
    double pred_rate_us = 50.0, ema_decay = 0.5, sigma = 0.1, cost_scale = 1.0;
    std::uint64_t seed = 1;
    bool emit_trace = false, no_validate = false, overhead = false;

    app.add_option("--bench", bench, "benchmark name");
    app.add_option("--policy", policy, "busy|idle|hybrid|prediction");
    app.add_option("--backend", backend, "virtual|real");
    app.add_option("--cpus", cpus, "CPUs per runtime instance");
    app.add_option("--pred-rate-us", pred_rate_us, "prediction period in microseconds");
    app.add_option("--ema-decay", ema_decay, "unitary-cost EMA decay");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--reps", reps, "repetitions (seed offset per rep)");
    app.add_option("--out-dir", out_dir, "artifact output directory");
    app.add_flag("--emit-trace", emit_trace, "write the event trace CSV");
    app.add_option("--share-with", share_with, "peer benchmark for a two-runtime sharing run");
    app.add_option("--share-policy", share_policy, "lewi|hybrid|prediction");
    app.add_option("--gran", gran, "fine|coarse");
    app.add_option("--sigma", sigma, "lognormal duration noise (0 = exact)");
    app.add_option("--spin-budget", spin_budget, "hybrid policy spin budget");
    app.add_option("--size-a", size_a, "benchmark primary size (0 = default)");
    app.add_option("--size-b", size_b, "benchmark secondary size (0 = default)");
    app.add_option("--cost-scale", cost_scale, "scale factor on task costs");
    app.add_flag("--overhead", overhead, "run monitoring on and off, report the ratio");
    app.add_flag("--no-validate", no_validate, "skip trace validation");
    app.add_option("--config", config_path, "key=value file with defaults for any option");

    // Two-pass parse so config-file values act as defaults.
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            auto extra = load_config_args(config_path);
            std::vector<std::string> full;
            for (const auto& a : extra)
                full.push_back(a);
            for (int i = 1; i < argc; ++i)
                full.push_back(argv[i]);
            std::vector<const char*> cargs{argv[0]};
            for (const auto& a : full)
                cargs.push_back(a.c_str());
            app.clear();
            app.parse(static_cast<int>(cargs.size()), cargs.data());
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    RunConfig cfg;
    if (!parse_bench(bench, cfg.bench.kind)) {
        std::cerr << "unknown benchmark: " << bench << "\n";
        return 2;
    }
    cfg.bench.granularity = gran == "coarse" ? Granularity::Coarse : Granularity::Fine;
    cfg.bench.size_a = size_a;
    cfg.bench.size_b = size_b;
    cfg.bench.sigma = sigma;
    cfg.bench.cost_scale = cost_scale;
    if (!parse_policy(policy, cfg.policy)) {
        std::cerr << "unknown policy: " << policy << "\n";
        return 2;
    }
    if (!parse_backend(backend, cfg.backend)) {
        std::cerr << "unknown backend: " << backend << "\n";
        return 2;
    }
    cfg.cpus = cpus;
    cfg.pred_rate_us = pred_rate_us;
    cfg.ema_decay = ema_decay;
    cfg.spin_budget = spin_budget;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    cfg.emit_trace = emit_trace;
    cfg.validate = !no_validate && cfg.backend == Backend::Virtual;
    if (!share_with.empty()) {
        BenchmarkSpec peer = cfg.bench;
        if (!parse_bench(share_with, peer.kind)) {
            std::cerr << "unknown benchmark: " << share_with << "\n";
            return 2;
        }
        cfg.share_bench = peer;
        if (!parse_sharing(share_policy, cfg.share_policy)) {
            std::cerr << "unknown sharing policy: " << share_policy << "\n";
            return 2;
        }
        if (cfg.backend != Backend::Virtual) {
            std::cerr << "sharing runs require --backend virtual\n";
            return 2;
        }
    }
    if (emit_trace && cfg.backend == Backend::Real) {
        std::cerr << "traces are only recorded by the virtual backend\n";
        return 2;
    }

    try {
        if (overhead) {
            // Same workload with monitoring+predictions on vs everything off.
            RunConfig on = cfg, off = cfg;
            on.monitoring = true;
            on.run_predictor = true;
            off.monitoring = false;
            off.run_predictor = false;
            double t_on = 0, t_off = 0;
            for (int r = 0; r < reps; ++r) {
                on.rep = off.rep = r;
                on.seed = off.seed = seed + static_cast<std::uint64_t>(r);
                t_on += run_single(on).primary().makespan_us;
                t_off += run_single(off).primary().makespan_us;
            }
            double ratio = t_off > 0 ? t_on / t_off : 0.0;
            std::cout << "overhead_ratio," << ratio << "\n";
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                std::ofstream f(std::filesystem::path(out_dir) / "overhead.csv");
                f << "bench,backend,reps,makespan_on_us,makespan_off_us,ratio\n";
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f,%.6f\n",
                              bench_name(cfg.bench.kind), backend_name(cfg.backend), reps,
                              t_on / reps, t_off / reps, ratio);
                f << buf;
            }
            return 0;
        }

        std::vector<RunResult> runs;
        for (int r = 0; r < reps; ++r) {
            cfg.rep = r;
            cfg.seed = seed + static_cast<std::uint64_t>(r);
            RunResult res = run_single(cfg);
            for (size_t i = 0; i < res.runtimes.size(); ++i) {
                const RuntimeResult& rr = res.runtimes[i];
                std::cout << res.run_id << (res.runtimes.size() > 1 ? "-rt" + std::to_string(i) : "")
                          << ": makespan_us=" << rr.makespan_us;
                if (cfg.backend == Backend::Virtual)
                    std::cout << " energy=" << rr.energy.energy << " edp=" << rr.energy.edp;
                if (cfg.share_bench)
                    std::cout << " arbiter_calls=" << rr.arbiter.total_calls();
                std::cout << "\n";
            }
            runs.push_back(std::move(res));
        }
        if (!out_dir.empty() && cfg.backend == Backend::Virtual) {
            std::filesystem::create_directories(out_dir);
            std::ofstream f(std::filesystem::path(out_dir) / "energy.csv");
            write_energy_csv(f, runs);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
