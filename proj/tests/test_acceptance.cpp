// Acceptance suite: each check prints exactly one PASS/FAIL line and the
// process exits nonzero if any of them failed.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "taskrt/generators.hpp"
#include "taskrt/harness.hpp"
#include "taskrt/predictor.hpp"
#include "taskrt/validate.hpp"
#include "taskrt/virtual_engine.hpp"

using namespace taskrt;

namespace {

int g_failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail)
{
    std::printf("criterion %d (%s): %s%s%s\n", n, name, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok)
        g_failures++;
}

std::string fmt(const char* pat, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, pat, a, b, c);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

// Literal fold over the snapshot, written independently of the library code.
int brute_force_target(const std::vector<TypeSnapshot>& snap, TimeNs period, int n_cpus,
                       bool allow_zero)
{
    double gamma = 0.0;
    double f = static_cast<double>(period) / 1000.0;
    long long m_total = 0;
    for (const TypeSnapshot& s : snap)
        m_total += s.live;
    for (const TypeSnapshot& s : snap) {
        if (gamma >= n_cpus)
            break;
        if (s.observations > 0)
            gamma += (s.ready_cost + s.exec_cost) * s.alpha / f;
        else
            gamma += static_cast<double>(s.live);
    }
    double delta = std::min(std::ceil(gamma), static_cast<double>(m_total));
    double lo = allow_zero ? 0.0 : 1.0;
    delta = std::max(lo, std::min(delta, static_cast<double>(n_cpus)));
    return static_cast<int>(delta);
}

void criterion1()
{
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> cost(0.0, 2000.0);
    std::uniform_real_distribution<double> alpha(0.01, 50.0);
    int mismatches = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<TypeSnapshot> snap(1 + rng() % 6);
        for (TypeSnapshot& s : snap) {
            s.observations = rng() % 3 == 0 ? 0 : 1 + static_cast<std::int64_t>(rng() % 100);
            s.alpha = s.observations > 0 ? alpha(rng) : 0.0;
            s.ready_cost = cost(rng);
            s.exec_cost = cost(rng);
            s.live = static_cast<std::int64_t>(rng() % 64);
        }
        TimeNs period = static_cast<TimeNs>(1 + rng() % 2000) * kMicrosecond;
        int n_cpus = 1 + static_cast<int>(rng() % 64);
        bool allow_zero = rng() % 2 == 0;
        int expect = brute_force_target(snap, period, n_cpus, allow_zero);
        int got = get_cpu_prediction(snap, period, n_cpus, allow_zero).target_cpus;
        if (expect != got)
            mismatches++;
    }
    report(1, "predictor matches brute-force fold", mismatches == 0,
           mismatches ? fmt("%.0f mismatches of 10000", double(mismatches)) : "10000/10000 exact");
}

// ---------------------------------------------------------------- criterion 2

void criterion2()
{
    auto accuracy_at = [](double sigma) {
        RunConfig cfg;
        cfg.bench.kind = BenchKind::GaussSeidelBarrier;
        cfg.bench.sigma = sigma;
        cfg.policy = PolicyKind::Prediction;
        cfg.seed = 3;
        RunResult r = run_single(cfg);
        return r.primary().accuracy.global;
    };
    AccuracyRow exact = accuracy_at(0.0);
    AccuracyRow noisy = accuracy_at(0.1);
    bool ok = exact.instances >= 25600 && exact.available && exact.avg_accuracy_pct >= 99.5 &&
              noisy.available && noisy.avg_accuracy_pct >= 85.0;
    report(2, "prediction accuracy", ok,
           fmt("sigma=0: %.4f%% over %.0f tasks; sigma=0.1: %.2f%%", exact.avg_accuracy_pct,
               double(exact.instances), noisy.avg_accuracy_pct));
}

// ---------------------------------------------------------------- criterion 3

struct Timeline {
    std::int64_t transitions = 0;
    int min_active = -1, max_active = -1;
    // Active-cpu count envelope over [from_us, to_us), including the level
    // carried into the window.
    void scan(const EventLog& log, double from_us_, double to_us_)
    {
        int active = 8;
        TimeNs from = from_us(from_us_), to = from_us(to_us_);
        auto sample = [&](int level) {
            if (min_active < 0)
                min_active = max_active = level;
            min_active = std::min(min_active, level);
            max_active = std::max(max_active, level);
        };
        bool entered = false;
        for (const EventRecord& r : log.records()) {
            if (r.kind != EventKind::Park && r.kind != EventKind::Resume)
                continue;
            if (!entered && r.time >= from) {
                sample(active); // level carried into the window
                entered = true;
            }
            if (r.time >= to)
                break;
            active += r.kind == EventKind::Resume ? 1 : -1;
            if (r.time >= from) {
                transitions++;
                sample(active);
            }
        }
        if (!entered)
            sample(active); // no transition at or past `from`: flat line
    }
};

void criterion3()
{
    BenchmarkSpec spec;
    spec.kind = BenchKind::TwoPhaseFig1;
    spec.sigma = 0.0;
    Workload wl = generate(spec, 1);

    // Phase boundaries: 30 x 100 us of six chains, then 100 x 100 us of 4-5.
    EngineConfig pc;
    pc.policy.kind = PolicyKind::Prediction;
    VirtualEngine pred({{&wl, 8}}, pc);
    pred.run();
    Timeline alpha;
    alpha.scan(pred.log(), 500.0, 2900.0);
    Timeline beta;
    beta.scan(pred.log(), 3500.0, 12500.0);
    double periods = (to_us(pred.makespan()) - 0.0) / 50.0;
    std::int64_t pred_trans = pred.cpu_manager().parks() + pred.cpu_manager().resumes();

    EngineConfig ic;
    ic.policy.kind = PolicyKind::Idle;
    VirtualEngine idle({{&wl, 8}}, ic);
    idle.run();
    std::int64_t idle_trans = idle.cpu_manager().parks() + idle.cpu_manager().resumes();

    EngineConfig bc;
    bc.policy.kind = PolicyKind::Busy;
    VirtualEngine busy({{&wl, 8}}, bc);
    busy.run();
    bool busy_holds = busy.cpu_manager().parks() == 0;

    bool ok = alpha.min_active == 6 && alpha.max_active == 6 && beta.min_active >= 4 &&
              beta.max_active <= 6 && static_cast<double>(pred_trans) <= periods &&
              idle_trans >= 5 * pred_trans && busy_holds;
    report(3, "two-phase cpu timeline", ok,
           fmt("phase-a active=[%.0f,%.0f]", alpha.min_active, alpha.max_active) +
               fmt(" phase-b=[%.0f,%.0f]", beta.min_active, beta.max_active) +
               fmt(" transitions pred=%.0f idle=%.0f periods=%.0f", double(pred_trans),
                   double(idle_trans), periods));
}

// ---------------------------------------------------------------- criterion 4

void criterion4()
{
    struct Cell {
        double edp = 0.0, makespan = 0.0;
    };
    std::vector<BenchKind> suite{BenchKind::CholeskyDag,     BenchKind::Multisaxpy,
                                 BenchKind::GaussSeidelBarrier, BenchKind::StreamLike,
                                 BenchKind::TwoPhaseFig1,    BenchKind::FineGrainStress};
    bool ok = true;
    std::string detail;
    size_t validated_runs = 0;
    for (BenchKind bench : suite) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            std::map<PolicyKind, Cell> cells;
            for (PolicyKind pol : {PolicyKind::Busy, PolicyKind::Idle, PolicyKind::Hybrid,
                                   PolicyKind::Prediction}) {
                RunConfig cfg;
                cfg.bench.kind = bench;
                if (bench == BenchKind::FineGrainStress)
                    cfg.bench.size_a = 12; // trimmed block count, same wave shape
                cfg.policy = pol;
                cfg.seed = seed;
                RunResult r = run_single(cfg); // throws if the trace fails validation
                validated_runs++;
                cells[pol] = Cell{r.primary().energy.edp, r.primary().makespan_us};
            }
            const Cell& p = cells[PolicyKind::Prediction];
            const Cell& b = cells[PolicyKind::Busy];
            const Cell& i = cells[PolicyKind::Idle];
            bool cell_ok = p.edp <= b.edp && p.makespan <= 1.05 * b.makespan &&
                           p.edp <= 1.10 * i.edp;
            if (bench == BenchKind::FineGrainStress)
                cell_ok = cell_ok && p.edp < i.edp;
            if (!cell_ok && detail.empty())
                detail = std::string(bench_name(bench)) +
                         fmt(" seed=%.0f: edp p/b=%.4f p/i=%.4f", double(seed), p.edp / b.edp,
                             p.edp / i.edp) +
                         fmt(" makespan p/b=%.4f", p.makespan / b.makespan);
            ok = ok && cell_ok;
        }
    }
    if (detail.empty())
        detail = fmt("%.0f runs, all orderings hold", double(validated_runs));
    report(4, "energy-delay ordering across the suite", ok, detail);
}

// ---------------------------------------------------------------- criterion 5

void criterion5()
{
    RunConfig on;
    on.backend = Backend::Real;
    on.bench.kind = BenchKind::FineGrainStress;
    on.cpus = std::max(1u, std::thread::hardware_concurrency());
    on.policy = PolicyKind::Busy;
    on.monitoring = true;
    on.run_predictor = true;
    on.seed = 1;
    RunConfig off = on;
    off.monitoring = false;
    off.run_predictor = false;

    BenchmarkSpec probe = on.bench;
    std::size_t tasks = generate(probe, 1).tasks.size();
    double t_on = run_single(on).primary().makespan_us;
    double t_off = run_single(off).primary().makespan_us;
    double ratio = t_on / t_off;
    bool ok = tasks >= 1'000'000 && ratio <= 1.05;
    report(5, "real-backend monitoring overhead", ok,
           fmt("%.0f tasks, makespan on/off = %.4f", double(tasks), ratio));
}

// ---------------------------------------------------------------- criterion 6

void criterion6()
{
    auto run_shared = [](SharingKind sk) {
        RunConfig cfg;
        cfg.bench.kind = BenchKind::GaussSeidelBarrier;
        cfg.share_bench = BenchmarkSpec{};
        cfg.share_bench->kind = BenchKind::StreamLike;
        cfg.share_bench->size_a = 20000; // chain depth
        cfg.share_bench->size_b = 16;    // chains
        cfg.share_bench->cost_scale = 0.06;
        cfg.share_policy = sk;
        cfg.seed = 7;
        return run_single(cfg);
    };
    RunResult lewi = run_shared(SharingKind::Lewi);
    RunResult pred = run_shared(SharingKind::Prediction);
    auto calls = [](const RunResult& r) {
        return r.runtimes[0].arbiter.total_calls() + r.runtimes[1].arbiter.total_calls();
    };
    double call_ratio = double(calls(pred)) / double(calls(lewi));
    double stream_speedup = lewi.runtimes[1].makespan_us / pred.runtimes[1].makespan_us;
    double gs_ratio = pred.runtimes[0].makespan_us / lewi.runtimes[0].makespan_us;
    bool ok = call_ratio <= 0.25 && stream_speedup >= 1.2 && std::abs(gs_ratio - 1.0) <= 0.05;
    report(6, "arbiter call reduction and sharing speedup", ok,
           fmt("calls pred/lewi=%.4f stream speedup=%.3f gs ratio=%.4f", call_ratio,
               stream_speedup, gs_ratio));
}

// ---------------------------------------------------------------- criterion 7

void criterion7()
{
    // Replay validation plus conservation: quiescent workloads, delta bounds,
    // arbiter partition, and EMA hulls, across a mixed set of runs.
    bool ok = true;
    std::string detail;
    auto note = [&](const std::string& msg) {
        if (detail.empty())
            detail = msg;
        ok = false;
    };

    for (BenchKind bench : {BenchKind::CholeskyDag, BenchKind::GaussSeidelBarrier,
                            BenchKind::TwoPhaseFig1}) {
        for (PolicyKind pol : {PolicyKind::Busy, PolicyKind::Idle, PolicyKind::Hybrid,
                               PolicyKind::Prediction}) {
            BenchmarkSpec spec;
            spec.kind = bench;
            Workload wl = generate(spec, 9);
            EngineConfig cfg;
            cfg.policy.kind = pol;
            VirtualEngine e({{&wl, 8}}, cfg);
            e.run();

            auto errs = validate_log(e.log(), wl, 8);
            if (!errs.empty())
                note(std::string(bench_name(bench)) + "/" + policy_name(pol) + ": " + errs[0]);

            std::vector<TypeSnapshot> snap;
            e.monitoring().snapshot(snap);
            for (size_t j = 0; j < snap.size(); ++j) {
                if (snap[j].live != 0 || snap[j].ready_cost > 1e-6 || snap[j].exec_cost > 1e-6)
                    note(std::string(bench_name(bench)) + ": nonzero residual workload");
                if (snap[j].observations > 0) {
                    double lo, hi;
                    e.monitoring().ratio_hull(static_cast<TypeId>(j), lo, hi);
                    if (snap[j].alpha < lo - 1e-9 || snap[j].alpha > hi + 1e-9)
                        note(std::string(bench_name(bench)) + ": alpha outside observed hull");
                }
            }
            int active = e.cpu_manager().active();
            if (active < 0 || active > 8)
                note("active cpu count out of bounds");
        }
    }

    // Sharing run: ownership partition after a full run.
    BenchmarkSpec gs;
    gs.kind = BenchKind::GaussSeidelBarrier;
    gs.size_a = 20;
    BenchmarkSpec st;
    st.kind = BenchKind::StreamLike;
    Workload a = generate(gs, 5), b = generate(st, 5);
    EngineConfig cfg;
    cfg.policy.kind = PolicyKind::Idle;
    SharingSetup sh;
    sh.policy.kind = SharingKind::Lewi;
    VirtualEngine e({{&a, 4}, {&b, 4}}, cfg, sh);
    e.run();
    if (!e.arbiter()->partition_holds())
        note("arbiter ownership partition violated");
    if (!validate_log(e.log(0), a, 8, 0, 4).empty() || !validate_log(e.log(1), b, 8, 4, 8).empty())
        note("sharing trace incoherent");

    if (detail.empty())
        detail = "replay validation and conservation hold on every run";
    report(7, "conservation and replay validation", ok, detail);
}

// ---------------------------------------------------------------- criterion 8

void criterion8()
{
    auto pass = [](std::uint64_t seed) {
        std::ostringstream blob;
        {
            RunConfig cfg;
            cfg.bench.kind = BenchKind::TwoPhaseFig1;
            cfg.policy = PolicyKind::Prediction;
            cfg.seed = seed;
            Workload wl = generate(cfg.bench, seed);
            EngineConfig ec;
            ec.policy.kind = PolicyKind::Prediction;
            VirtualEngine e({{&wl, 8}}, ec);
            e.run();
            e.log().dump(blob, wl.types);
            std::vector<RunResult> runs{run_single(cfg)};
            write_energy_csv(blob, runs);
            write_accuracy_csv(blob, runs[0].primary().accuracy);
        }
        {
            RunConfig cfg;
            cfg.bench.kind = BenchKind::GaussSeidelBarrier;
            cfg.bench.size_a = 15;
            cfg.share_bench = BenchmarkSpec{};
            cfg.share_bench->kind = BenchKind::StreamLike;
            cfg.share_bench->size_a = 15;
            cfg.share_policy = SharingKind::Prediction;
            cfg.seed = seed;
            RunResult r = run_single(cfg);
            write_arbiter_csv(blob, r);
            std::vector<RunResult> runs{r};
            write_energy_csv(blob, runs);
        }
        return blob.str();
    };
    std::string first = pass(11);
    std::string second = pass(11);
    bool ok = !first.empty() && first == second;
    report(8, "byte-identical reruns", ok,
           ok ? fmt("%.0f bytes of logs and CSVs identical", double(first.size()))
              : "rerun output differs");
}

} // namespace

int main()
{
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    return g_failures != 0;
}
