#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "taskrt/arbiter.hpp"

using namespace taskrt;

namespace {

// Runtime 0 owns cpus 0-3, runtime 1 owns cpus 4-7.
SharingArbiter make_arbiter()
{
    return SharingArbiter({0, 0, 0, 0, 1, 1, 1, 1}, 2);
}

} // namespace

TEST_CASE("lend moves a held cpu into the pool; lending twice faults")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 2);
    CHECK(a.state(2) == CpuShareState::Lent);
    CHECK(a.holder(2) == -1);
    CHECK(a.lent_count() == 1);
    CHECK_THROWS_AS(a.lend(0, 2), std::logic_error);
    CHECK_THROWS_AS(a.lend(1, 3), std::logic_error); // not the holder
    CHECK(a.counters(0).lend_calls == 1);
}

TEST_CASE("acquire transfers up to want cpus in a single counted call")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 0);
    a.lend(0, 1);
    a.lend(0, 3);
    std::vector<int> got;
    CHECK(a.acquire(1, 5, got) == 3); // partial fulfillment
    CHECK(got.size() == 3);
    CHECK(a.counters(1).acquire_calls == 1);
    CHECK(a.counters(1).cpus_transferred == 3);
    for (int c : got) {
        CHECK(a.holder(c) == 1);
        CHECK(a.state(c) == CpuShareState::Borrowed);
    }

    got.clear();
    CHECK(a.acquire(1, 2, got) == 0); // empty pool is a valid zero return
    CHECK(got.empty());
    CHECK(a.counters(1).acquire_calls == 2);
}

TEST_CASE("acquire prefers the caller's own lent cpus")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 0);
    a.lend(1, 4);
    std::vector<int> got;
    CHECK(a.acquire(1, 1, got) == 1);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == 4);
    CHECK(a.state(4) == CpuShareState::HeldByOwner);
}

TEST_CASE("reclaim flags a borrowed cpu and finish_reclaim returns it home")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 1);
    std::vector<int> got;
    a.acquire(1, 1, got);
    REQUIRE(got == std::vector<int>{1});

    CHECK(a.reclaim(0, 1));
    CHECK(a.reclaim_requested(1));
    CHECK(a.counters(0).reclaim_calls == 1);

    CHECK(a.finish_reclaim(1) == 0);
    CHECK(a.state(1) == CpuShareState::HeldByOwner);
    CHECK(a.holder(1) == 0);
    CHECK_FALSE(a.reclaim_requested(1));
}

TEST_CASE("reclaim of a cpu that is not borrowed is a counted no-op")
{
    SharingArbiter a = make_arbiter();
    CHECK_FALSE(a.reclaim(0, 0));           // held by owner
    a.lend(0, 0);
    CHECK_FALSE(a.reclaim(0, 0));           // lent but not picked up
    CHECK_FALSE(a.reclaim(1, 0));           // not the owner
    CHECK(a.counters(0).reclaim_calls == 2);
}

TEST_CASE("clear_reclaim withdraws a pending request")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 1);
    std::vector<int> got;
    a.acquire(1, 1, got);
    a.reclaim(0, 1);
    a.clear_reclaim(1);
    CHECK_FALSE(a.reclaim_requested(1));
}

TEST_CASE("first_borrowed_out skips cpus already flagged for reclaim")
{
    SharingArbiter a = make_arbiter();
    a.lend(0, 1);
    a.lend(0, 2);
    std::vector<int> got;
    a.acquire(1, 2, got);
    CHECK(a.first_borrowed_out(0) == 1);
    a.reclaim(0, 1);
    CHECK(a.first_borrowed_out(0) == 2);
    a.reclaim(0, 2);
    CHECK(a.first_borrowed_out(0) == -1);
    CHECK(a.borrowed_out_count(0) == 2);
}

TEST_CASE("ownership partition holds under random operation sequences")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        SharingArbiter a = make_arbiter();
        for (int step = 0; step < 300; ++step) {
            int rt = static_cast<int>(rng() % 2);
            int cpu = static_cast<int>(rng() % 8);
            switch (rng() % 4) {
            case 0:
                if (a.holder(cpu) == rt)
                    a.lend(rt, cpu);
                break;
            case 1: {
                std::vector<int> got;
                a.acquire(rt, 1 + static_cast<int>(rng() % 4), got);
                break;
            }
            case 2:
                a.reclaim(rt, cpu);
                break;
            case 3:
                if (a.state(cpu) == CpuShareState::Borrowed && a.reclaim_requested(cpu))
                    a.finish_reclaim(cpu);
                break;
            }
            REQUIRE(a.partition_holds());
        }
    }
}
