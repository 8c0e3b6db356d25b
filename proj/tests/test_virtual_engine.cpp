#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "taskrt/generators.hpp"
#include "taskrt/validate.hpp"
#include "taskrt/virtual_engine.hpp"

using namespace taskrt;

namespace {

Workload independent_tasks(int n, double cost, TimeNs duration)
{
    Workload wl;
    TypeId t = wl.add_type("t");
    for (int i = 0; i < n; ++i)
        wl.add(t, cost, duration, {});
    return wl;
}

EngineConfig config(PolicyKind k)
{
    EngineConfig cfg;
    cfg.policy.kind = k;
    return cfg;
}

std::string dump(const VirtualEngine& e, const Workload& wl, int r = 0)
{
    std::ostringstream os;
    e.log(r).dump(os, wl.types);
    return os.str();
}

} // namespace

TEST_CASE("one task on one cpu finishes after its duration")
{
    Workload wl = independent_tasks(1, 10.0, from_us(10.0));
    VirtualEngine e({{&wl, 1}}, config(PolicyKind::Busy));
    e.run();
    CHECK(e.makespan() == from_us(10.0));
}

TEST_CASE("eight equal tasks on four cpus pack perfectly")
{
    Workload wl = independent_tasks(8, 10.0, from_us(10.0));
    VirtualEngine e({{&wl, 4}}, config(PolicyKind::Busy));
    e.run();
    CHECK(e.makespan() == from_us(20.0));
}

TEST_CASE("dependent task starts only after its dependency ends")
{
    Workload wl;
    TypeId t = wl.add_type("t");
    wl.add(t, 1.0, from_us(7.0), {});
    wl.add(t, 1.0, from_us(3.0), {0});
    VirtualEngine e({{&wl, 4}}, config(PolicyKind::Busy));
    e.run();
    CHECK(e.makespan() == from_us(10.0));
    CHECK(validate_log(e.log(), wl, 4).empty());
}

TEST_CASE("identical configs produce byte-identical event logs")
{
    BenchmarkSpec spec;
    spec.kind = BenchKind::CholeskyDag;
    spec.size_a = 6;
    Workload wl = generate(spec, 3);
    for (PolicyKind k : {PolicyKind::Busy, PolicyKind::Idle, PolicyKind::Prediction}) {
        VirtualEngine a({{&wl, 4}}, config(k));
        VirtualEngine b({{&wl, 4}}, config(k));
        a.run();
        b.run();
        CHECK(dump(a, wl) == dump(b, wl));
    }
}

TEST_CASE("all policies produce coherent traces on a mixed dag")
{
    BenchmarkSpec spec;
    spec.kind = BenchKind::CholeskyDag;
    spec.size_a = 8;
    Workload wl = generate(spec, 11);
    for (PolicyKind k : {PolicyKind::Busy, PolicyKind::Idle, PolicyKind::Hybrid,
                         PolicyKind::Prediction}) {
        VirtualEngine e({{&wl, 4}}, config(k));
        e.run();
        auto errs = validate_log(e.log(), wl, 4);
        for (const auto& err : errs)
            MESSAGE(policy_name(k) << ": " << err);
        CHECK(errs.empty());
        CHECK(e.makespan() > 0);
    }
}

TEST_CASE("idle policy parks and resumes around a serial stretch")
{
    // A serial chain keeps one cpu busy; the other three should park.
    Workload wl;
    TypeId t = wl.add_type("t");
    TaskId prev = wl.add(t, 10.0, from_us(10.0), {});
    for (int i = 0; i < 20; ++i)
        prev = wl.add(t, 10.0, from_us(10.0), {prev}, prev);
    VirtualEngine e({{&wl, 4}}, config(PolicyKind::Idle));
    e.run();
    CHECK(e.cpu_manager().parks() >= 3);
    CHECK(validate_log(e.log(), wl, 4).empty());
}

TEST_CASE("prediction policy uses no more active cpu-time than busy")
{
    BenchmarkSpec spec;
    spec.kind = BenchKind::TwoPhaseFig1;
    Workload wl = generate(spec, 5);
    auto active_us = [&](PolicyKind k) {
        VirtualEngine e({{&wl, 8}}, config(k));
        e.run();
        // Busy-spin plus execution time: integrate non-parked time per cpu.
        std::vector<TimeNs> parked_at(8, -1);
        double idle_us = 0.0;
        for (const EventRecord& r : e.log().records()) {
            if (r.kind == EventKind::Park)
                parked_at[r.cpu] = r.time;
            else if (r.kind == EventKind::Resume) {
                idle_us += to_us(r.time - parked_at[r.cpu]);
                parked_at[r.cpu] = -1;
            }
        }
        for (int c = 0; c < 8; ++c)
            if (parked_at[c] >= 0)
                idle_us += to_us(e.makespan() - parked_at[c]);
        return 8.0 * to_us(e.makespan()) - idle_us;
    };
    CHECK(active_us(PolicyKind::Prediction) <= active_us(PolicyKind::Busy));
}

TEST_CASE("monitoring can be disabled without changing completion")
{
    Workload wl = independent_tasks(64, 5.0, from_us(5.0));
    EngineConfig cfg = config(PolicyKind::Busy);
    cfg.monitoring = false;
    VirtualEngine e({{&wl, 4}}, cfg);
    e.run();
    CHECK(e.makespan() == from_us(80.0));
}

TEST_CASE("two-runtime sharing run stays coherent under every sharing policy")
{
    BenchmarkSpec gs;
    gs.kind = BenchKind::GaussSeidelBarrier;
    gs.size_a = 10;
    BenchmarkSpec st;
    st.kind = BenchKind::StreamLike;
    st.size_a = 10;
    Workload a = generate(gs, 2);
    Workload b = generate(st, 2);
    for (SharingKind sk : {SharingKind::Lewi, SharingKind::Hybrid, SharingKind::Prediction}) {
        EngineConfig cfg = config(sk == SharingKind::Prediction ? PolicyKind::Prediction
                                                                : PolicyKind::Idle);
        SharingSetup sh;
        sh.policy.kind = sk;
        VirtualEngine e({{&a, 4}, {&b, 4}}, cfg, sh);
        e.run();
        REQUIRE(e.arbiter() != nullptr);
        CHECK(e.arbiter()->partition_holds());
        auto errs0 = validate_log(e.log(0), a, 8, 0, 4);
        auto errs1 = validate_log(e.log(1), b, 8, 4, 8);
        for (const auto& err : errs0)
            MESSAGE(sharing_name(sk) << " rt0: " << err);
        for (const auto& err : errs1)
            MESSAGE(sharing_name(sk) << " rt1: " << err);
        CHECK(errs0.empty());
        CHECK(errs1.empty());
        CHECK(e.arbiter()->counters(0).total_calls() + e.arbiter()->counters(1).total_calls() > 0);
    }
}

TEST_CASE("sharing reruns are deterministic")
{
    BenchmarkSpec gs;
    gs.kind = BenchKind::GaussSeidelBarrier;
    gs.size_a = 8;
    BenchmarkSpec st;
    st.kind = BenchKind::StreamLike;
    st.size_a = 8;
    Workload a = generate(gs, 6);
    Workload b = generate(st, 6);
    auto once = [&]() {
        SharingSetup sh;
        sh.policy.kind = SharingKind::Lewi;
        VirtualEngine e({{&a, 4}, {&b, 4}}, config(PolicyKind::Idle), sh);
        e.run();
        return dump(e, a, 0) + dump(e, b, 1);
    };
    CHECK(once() == once());
}
