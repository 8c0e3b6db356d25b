#pragma once

#include <cassert>
#include <cstdint>
#include <mutex>
#include <vector>

#include "taskrt/types.hpp"

namespace taskrt {

enum class SharingKind { Lewi, Hybrid, Prediction };

inline const char* sharing_name(SharingKind k)
{
    switch (k) {
    case SharingKind::Lewi: return "lewi";
    case SharingKind::Hybrid: return "hybrid";
    case SharingKind::Prediction: return "prediction";
    }
    return "?";
}

struct SharingPolicy {
    SharingKind kind = SharingKind::Lewi;
    int spin_budget = 100; // hybrid: empty polls before lending
};

enum class CpuShareState : std::uint8_t { HeldByOwner, Lent, Borrowed };

struct ArbiterCounters {
    std::int64_t lend_calls = 0;
    std::int64_t acquire_calls = 0;
    std::int64_t reclaim_calls = 0;
    std::int64_t cpus_transferred = 0;
    std::int64_t total_calls() const { return lend_calls + acquire_calls + reclaim_calls; }
};

// In-process stand-in for a DLB-style load balancer: two runtime instances
// share one physical CPU set through lend/acquire/reclaim entry points. Every
// entry point counts as one arbiter call and carries a synthetic latency so
// that calls are not free. Ledger transitions are serialized per arbiter.
class SharingArbiter {
public:
    SharingArbiter(std::vector<int> owners, int n_runtimes, TimeNs call_latency = 1 * kMicrosecond)
        : call_latency_(call_latency), counters_(n_runtimes)
    {
        for (size_t c = 0; c < owners.size(); ++c)
            cpus_.push_back(CpuEntry{owners[c], owners[c], CpuShareState::HeldByOwner, false});
    }

    TimeNs call_latency() const { return call_latency_; }
    int n_cpus() const { return static_cast<int>(cpus_.size()); }

    // Releases a CPU held by `runtime` into the shared pool. Lending a CPU the
    // caller does not hold is an invariant breach.
    void lend(int runtime, int cpu)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        CpuEntry& e = cpus_[cpu];
        if (e.holder != runtime)
            throw std::logic_error("lend: caller does not hold this cpu");
        e.holder = -1;
        e.state = CpuShareState::Lent;
        e.reclaim_requested = false;
        counters_[runtime].lend_calls++;
    }

    // Transfers up to `want` pooled CPUs to the caller in a single call. CPUs
    // owned by the caller are preferred. Returns the number transferred.
    int acquire(int runtime, int want, std::vector<int>& out)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        counters_[runtime].acquire_calls++;
        int got = 0;
        for (int pass = 0; pass < 2 && got < want; ++pass) {
            for (size_t c = 0; c < cpus_.size() && got < want; ++c) {
                CpuEntry& e = cpus_[c];
                if (e.state != CpuShareState::Lent)
                    continue;
                bool own = e.owner == runtime;
                if ((pass == 0) != own)
                    continue;
                e.holder = runtime;
                e.state = own ? CpuShareState::HeldByOwner : CpuShareState::Borrowed;
                e.reclaim_requested = false;
                counters_[runtime].cpus_transferred++;
                out.push_back(static_cast<int>(c));
                got++;
            }
        }
        return got;
    }

    // Asks the borrower of an owned CPU to vacate at its next poll boundary.
    // Reclaiming a CPU that is not borrowed is a no-op (returns false).
    bool reclaim(int runtime, int cpu)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        counters_[runtime].reclaim_calls++;
        CpuEntry& e = cpus_[cpu];
        if (e.owner != runtime || e.state != CpuShareState::Borrowed)
            return false;
        e.reclaim_requested = true;
        return true;
    }

    // Borrower-side completion of a reclaim: the CPU goes straight back to its
    // owner. Returns the owner runtime id.
    int finish_reclaim(int cpu)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        CpuEntry& e = cpus_[cpu];
        assert(e.state == CpuShareState::Borrowed && e.reclaim_requested);
        e.holder = e.owner;
        e.state = CpuShareState::HeldByOwner;
        e.reclaim_requested = false;
        counters_[e.owner].cpus_transferred++;
        return e.owner;
    }

    bool reclaim_requested(int cpu) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return cpus_[cpu].reclaim_requested;
    }

    // Withdraws a pending reclaim request (owner no longer wants the CPU back).
    void clear_reclaim(int cpu)
    {
        std::lock_guard<std::mutex> lk(mutex_);
        cpus_[cpu].reclaim_requested = false;
    }

    // Lowest-id CPU owned by `runtime` that a peer borrowed and that has no
    // reclaim pending yet, or -1.
    int first_borrowed_out(int runtime) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        for (size_t c = 0; c < cpus_.size(); ++c) {
            const CpuEntry& e = cpus_[c];
            if (e.owner == runtime && e.state == CpuShareState::Borrowed && !e.reclaim_requested)
                return static_cast<int>(c);
        }
        return -1;
    }

    int holder(int cpu) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return cpus_[cpu].holder;
    }

    int owner(int cpu) const { return cpus_[cpu].owner; }

    CpuShareState state(int cpu) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        return cpus_[cpu].state;
    }

    int lent_count() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        int n = 0;
        for (const CpuEntry& e : cpus_)
            n += e.state == CpuShareState::Lent;
        return n;
    }

    // Number of CPUs owned by `runtime` currently borrowed by a peer.
    int borrowed_out_count(int runtime) const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        int n = 0;
        for (const CpuEntry& e : cpus_)
            n += e.owner == runtime && e.state == CpuShareState::Borrowed;
        return n;
    }

    const ArbiterCounters& counters(int runtime) const { return counters_[runtime]; }

    // Ownership conservation: the holder multiset plus the lent pool must
    // partition the CPU set.
    bool partition_holds() const
    {
        std::lock_guard<std::mutex> lk(mutex_);
        for (const CpuEntry& e : cpus_) {
            if (e.state == CpuShareState::Lent && e.holder != -1)
                return false;
            if (e.state != CpuShareState::Lent && e.holder < 0)
                return false;
            if (e.state == CpuShareState::HeldByOwner && e.holder != e.owner)
                return false;
            if (e.state == CpuShareState::Borrowed && e.holder == e.owner)
                return false;
        }
        return true;
    }

private:
    struct CpuEntry {
        int owner;
        int holder; // -1 while in the lent pool
        CpuShareState state;
        bool reclaim_requested;
    };

    TimeNs call_latency_;
    mutable std::mutex mutex_;
    std::vector<CpuEntry> cpus_;
    std::vector<ArbiterCounters> counters_;
};

} // namespace taskrt
