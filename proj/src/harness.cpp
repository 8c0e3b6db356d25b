#include "taskrt/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "taskrt/real_engine.hpp"
#include "taskrt/validate.hpp"
#include "taskrt/virtual_engine.hpp"

namespace taskrt {

const char* backend_name(Backend b) { return b == Backend::Virtual ? "virtual" : "real"; }

bool parse_backend(const std::string& s, Backend& out)
{
    if (s == "virtual") out = Backend::Virtual;
    else if (s == "real") out = Backend::Real;
    else return false;
    return true;
}

bool parse_policy(const std::string& s, PolicyKind& out)
{
    if (s == "busy") out = PolicyKind::Busy;
    else if (s == "idle") out = PolicyKind::Idle;
    else if (s == "hybrid") out = PolicyKind::Hybrid;
    else if (s == "prediction" || s == "pred") out = PolicyKind::Prediction;
    else return false;
    return true;
}

bool parse_sharing(const std::string& s, SharingKind& out)
{
    if (s == "lewi") out = SharingKind::Lewi;
    else if (s == "hybrid") out = SharingKind::Hybrid;
    else if (s == "prediction" || s == "pred") out = SharingKind::Prediction;
    else return false;
    return true;
}

namespace {
    std::string fmt(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return buf;
    }
} // namespace

std::string run_id_for(const RunConfig& cfg)
{
    std::ostringstream os;
    os << bench_name(cfg.bench.kind);
    if (cfg.share_bench)
        os << "+" << bench_name(cfg.share_bench->kind) << "_" << sharing_name(cfg.share_policy);
    else
        os << "_" << policy_name(cfg.policy);
    os << "_" << backend_name(cfg.backend) << "_s" << cfg.seed << "_r" << cfg.rep;
    return os.str();
}

namespace {

    void emit_artifacts(const RunConfig& cfg, const std::string& run_id, const RunResult& result,
                        const std::vector<const EventLog*>& logs,
                        const std::vector<const Workload*>& wls)
    {
        if (cfg.out_dir.empty())
            return;
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        for (size_t r = 0; r < result.runtimes.size(); ++r) {
            std::string suffix = result.runtimes.size() > 1 ? "-rt" + std::to_string(r) : "";
            {
                std::ofstream f(fs::path(cfg.out_dir) / ("accuracy-" + run_id + suffix + ".csv"));
                write_accuracy_csv(f, result.runtimes[r].accuracy);
            }
            if (cfg.emit_trace && r < logs.size() && logs[r]) {
                std::ofstream f(fs::path(cfg.out_dir) / ("trace-" + run_id + suffix + ".log"));
                logs[r]->dump(f, wls[r]->types);
            }
        }
        if (cfg.share_bench) {
            std::ofstream f(fs::path(cfg.out_dir) / ("arbiter-" + run_id + ".csv"));
            write_arbiter_csv(f, result);
        }
    }

    RunResult run_virtual(const RunConfig& cfg)
    {
        Workload wl = generate(cfg.bench, cfg.seed);
        std::optional<Workload> peer;
        if (cfg.share_bench)
            peer = generate(*cfg.share_bench, cfg.seed);

        EngineConfig ec;
        ec.policy.kind = cfg.policy;
        ec.policy.spin_budget = cfg.spin_budget;
        ec.predictor.period = static_cast<TimeNs>(cfg.pred_rate_us * kMicrosecond);
        ec.ema_decay = cfg.ema_decay;
        ec.monitoring = cfg.monitoring;
        ec.run_predictor = cfg.run_predictor;

        std::vector<RuntimeSetup> setups{RuntimeSetup{&wl, cfg.cpus}};
        std::optional<SharingSetup> sharing;
        if (peer) {
            setups.push_back(RuntimeSetup{&*peer, cfg.cpus});
            sharing = SharingSetup{SharingPolicy{cfg.share_policy, cfg.spin_budget},
                                   cfg.arbiter_latency};
            // Sharing decisions hang off the prediction target only for the
            // prediction arbiter policy; workers otherwise spin per policy.
            ec.policy.kind = cfg.share_policy == SharingKind::Prediction
                                 ? PolicyKind::Prediction
                                 : PolicyKind::Idle;
        }

        VirtualEngine eng(setups, ec, sharing);
        eng.run();

        RunResult result;
        result.run_id = run_id_for(cfg);
        result.config = cfg;
        std::vector<const EventLog*> logs;
        std::vector<const Workload*> wls{&wl};
        if (peer)
            wls.push_back(&*peer);
        for (int r = 0; r < eng.n_runtimes(); ++r) {
            RuntimeResult rr;
            rr.bench = wls[r]->name;
            rr.makespan_us = to_us(eng.makespan(r));
            rr.energy = compute_edp(eng.log(r), cfg.energy, eng.cpu_base(r),
                                    eng.cpu_base(r) + eng.cpu_count(r));
            rr.accuracy = eng.monitoring(r).accuracy_report();
            rr.parks = eng.cpu_manager(r).parks();
            rr.resumes = eng.cpu_manager(r).resumes();
            if (eng.arbiter())
                rr.arbiter = eng.arbiter()->counters(r);
            if (cfg.validate) {
                int base = eng.cpu_base(r);
                rr.violations = validate_log(eng.log(r), *wls[r], eng.total_cpus(), base,
                                             base + eng.cpu_count(r));
                if (!rr.violations.empty())
                    throw std::runtime_error("trace validation failed for " + result.run_id +
                                             ": " + rr.violations.front());
            }
            result.runtimes.push_back(std::move(rr));
            logs.push_back(&eng.log(r));
        }
        emit_artifacts(cfg, result.run_id, result, logs, wls);
        return result;
    }

    RunResult run_real(const RunConfig& cfg)
    {
        if (cfg.share_bench)
            throw std::invalid_argument("sharing runs require the virtual backend");
        Workload wl = generate(cfg.bench, cfg.seed);
        RealEngineConfig rc;
        rc.policy.kind = cfg.policy;
        rc.policy.spin_budget = cfg.spin_budget;
        rc.predictor.period = static_cast<TimeNs>(cfg.pred_rate_us * kMicrosecond);
        rc.ema_decay = cfg.ema_decay;
        rc.monitoring = cfg.monitoring;
        rc.run_predictor = cfg.run_predictor;

        auto t0 = std::chrono::steady_clock::now();
        RealEngine eng(wl, cfg.cpus, rc);
        eng.run();
        auto t1 = std::chrono::steady_clock::now();

        RunResult result;
        result.run_id = run_id_for(cfg);
        result.config = cfg;
        result.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        RuntimeResult rr;
        rr.bench = wl.name;
        rr.makespan_us = to_us(eng.makespan());
        rr.accuracy = eng.monitoring().accuracy_report();
        rr.parks = eng.cpu_manager().parks();
        rr.resumes = eng.cpu_manager().resumes();
        result.runtimes.push_back(std::move(rr));
        emit_artifacts(cfg, result.run_id, result, {}, {&wl});
        return result;
    }

} // namespace

RunResult run_single(const RunConfig& cfg)
{
    return cfg.backend == Backend::Virtual ? run_virtual(cfg) : run_real(cfg);
}

void write_energy_csv(std::ostream& os, const std::vector<RunResult>& runs)
{
    os << "run_id,policy,makespan_us,energy,edp\n";
    for (const RunResult& run : runs) {
        const char* pol = run.config.share_bench ? sharing_name(run.config.share_policy)
                                                 : policy_name(run.config.policy);
        for (size_t r = 0; r < run.runtimes.size(); ++r) {
            const RuntimeResult& rr = run.runtimes[r];
            std::string id = run.run_id;
            if (run.runtimes.size() > 1)
                id += "-rt" + std::to_string(r);
            os << id << "," << pol << "," << fmt(rr.makespan_us) << "," << fmt(rr.energy.energy)
               << "," << fmt(rr.energy.edp) << "\n";
        }
    }
}

void write_accuracy_csv(std::ostream& os, const AccuracyReport& report)
{
    os << "task_type,instances,avg_accuracy_pct\n";
    auto row = [&](const AccuracyRow& r) {
        os << r.task_type << "," << r.instances << ",";
        if (r.available)
            os << fmt(r.avg_accuracy_pct);
        else
            os << "NA";
        os << "\n";
    };
    for (const AccuracyRow& r : report.per_type)
        row(r);
    row(report.global);
}

void write_arbiter_csv(std::ostream& os, const RunResult& run)
{
    os << "runtime,lend_calls,acquire_calls,reclaim_calls,cpus_transferred\n";
    for (size_t r = 0; r < run.runtimes.size(); ++r) {
        const ArbiterCounters& c = run.runtimes[r].arbiter;
        os << run.runtimes[r].bench << "," << c.lend_calls << "," << c.acquire_calls << ","
           << c.reclaim_calls << "," << c.cpus_transferred << "\n";
    }
}

} // namespace taskrt
