#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace simjoin::mpc {

/// Message counts for one synchronous round.
struct RoundLoad {
    std::vector<std::int64_t> sent;
    std::vector<std::int64_t> received;
};

/// Per-round, per-processor message log. L is the maximum of sent and
/// received over all rounds and processors.
struct LoadReport {
    int processors = 0;
    std::vector<RoundLoad> per_round;

    int rounds() const { return static_cast<int>(per_round.size()); }

    std::int64_t max_load() const {
        std::int64_t l = 0;
        for (const auto& r : per_round) {
            for (auto v : r.sent) l = std::max(l, v);
            for (auto v : r.received) l = std::max(l, v);
        }
        return l;
    }
};

/// Simulated synchronous shared-nothing cluster: p local item stores plus a
/// message log. Items only move through rounds; every delivered message is
/// charged to its sender and its receiver (self-addressed messages
/// included). Initial placement via seed_items models input residency and
/// is free.
template <typename Item>
class Cluster {
public:
    explicit Cluster(int processor_count) : locals_(validate_p(processor_count)) {
        log_.processors = processor_count;
    }

    int processors() const { return static_cast<int>(locals_.size()); }

    std::vector<Item>& local(int proc) { return locals_.at(proc); }
    const std::vector<Item>& local(int proc) const { return locals_.at(proc); }

    std::size_t total_items() const {
        std::size_t n = 0;
        for (const auto& l : locals_) n += l.size();
        return n;
    }

    /// Block-partitions items over the processors (first n%p blocks get the
    /// extra item). Not a communication round.
    void seed_items(std::vector<Item> items) {
        const int p = processors();
        const std::size_t n = items.size();
        std::size_t next = 0;
        for (int proc = 0; proc < p; ++proc) {
            std::size_t len = block_size(n, p, proc);
            auto& dst = locals_[proc];
            for (std::size_t i = 0; i < len; ++i) dst.push_back(std::move(items[next++]));
        }
    }

    void clear_items() {
        for (auto& l : locals_) l.clear();
    }

    class Emitter {
    public:
        void send(int dest, Item item) {
            if (dest < 0 || dest >= static_cast<int>(inbox_->size()))
                throw std::out_of_range("Cluster: message addressed to processor " +
                                        std::to_string(dest));
            (*inbox_)[dest].push_back(std::move(item));
            ++(*sent_);
        }

    private:
        friend class Cluster;
        std::vector<std::vector<Item>>* inbox_ = nullptr;
        std::int64_t* sent_ = nullptr;
    };

    /// One synchronous round. compute(proc, local_items, emitter) may mutate
    /// or consume its local store and address messages to any processor.
    /// Messages are delivered after every processor has run, appended in
    /// sender order, so results are independent of host execution order.
    template <typename Compute>
    void run_round(Compute&& compute) {
        const int p = processors();
        RoundLoad round;
        round.sent.assign(p, 0);
        round.received.assign(p, 0);
        std::vector<std::vector<Item>> inbox(p);

        Emitter em;
        em.inbox_ = &inbox;
        for (int proc = 0; proc < p; ++proc) {
            em.sent_ = &round.sent[proc];
            compute(proc, locals_[proc], em);
        }
        for (int proc = 0; proc < p; ++proc) {
            round.received[proc] = static_cast<std::int64_t>(inbox[proc].size());
            auto& dst = locals_[proc];
            for (auto& it : inbox[proc]) dst.push_back(std::move(it));
        }
        push_round(std::move(round));
    }

    /// A round that moves control data rather than items (splitters,
    /// subtotals, broadcast payloads). The caller supplies the per-processor
    /// counts; conservation is still enforced.
    void accounting_round(std::vector<std::int64_t> sent, std::vector<std::int64_t> received) {
        if (static_cast<int>(sent.size()) != processors() ||
            static_cast<int>(received.size()) != processors())
            throw std::invalid_argument("accounting_round: count vectors must have length p");
        push_round(RoundLoad{std::move(sent), std::move(received)});
    }

    const LoadReport& load_log() const { return log_; }
    int round_count() const { return log_.rounds(); }

    static std::size_t block_size(std::size_t n, int p, int proc) {
        std::size_t base = n / p, rem = n % p;
        return base + (static_cast<std::size_t>(proc) < rem ? 1 : 0);
    }

private:
    static int validate_p(int p) {
        if (p < 1) throw std::invalid_argument("Cluster: processor count must be >= 1");
        return p;
    }

    void push_round(RoundLoad round) {
        std::int64_t s = std::accumulate(round.sent.begin(), round.sent.end(), std::int64_t{0});
        std::int64_t r =
            std::accumulate(round.received.begin(), round.received.end(), std::int64_t{0});
        if (s != r)
            throw std::logic_error("Cluster: round violates conservation (sent " +
                                   std::to_string(s) + " != received " + std::to_string(r) + ")");
        log_.per_round.push_back(std::move(round));
    }

    std::vector<std::vector<Item>> locals_;
    LoadReport log_;
};

/// Full per-round log plus derived summary values; idempotent. Before any
/// round it is an empty report with L = 0.
template <typename Item>
const LoadReport& load_summary(const Cluster<Item>& cluster) {
    return cluster.load_log();
}

/// Global sort by key in exactly 2 accounted rounds. An idealized
/// orchestrator derives exact balanced splitters from global knowledge; the
/// splitter exchange is charged as one all-gather round (each processor
/// sends its boundary candidate to the p-1 others and receives p-1
/// splitters). The routing round then places the i-th contiguous block of
/// the sorted order on processor i, ties broken by origin (processor,
/// local index), so routing receives at most ceil(N/p) per processor.
template <typename Item, typename KeyFn>
void mpc_sort(Cluster<Item>& cluster, KeyFn key) {
    const int p = cluster.processors();

    struct Ref {
        int proc;
        std::size_t idx;
    };
    std::vector<Ref> refs;
    for (int proc = 0; proc < p; ++proc) {
        auto& l = cluster.local(proc);
        for (std::size_t i = 0; i < l.size(); ++i) refs.push_back({proc, i});
    }
    const std::size_t n = refs.size();

    std::sort(refs.begin(), refs.end(), [&](const Ref& a, const Ref& b) {
        auto ka = key(cluster.local(a.proc)[a.idx]);
        auto kb = key(cluster.local(b.proc)[b.idx]);
        if (ka != kb) return ka < kb;
        if (a.proc != b.proc) return a.proc < b.proc;
        return a.idx < b.idx;
    });

    // rank_of[proc][idx] = global rank
    std::vector<std::vector<std::size_t>> rank_of(p);
    for (int proc = 0; proc < p; ++proc) rank_of[proc].resize(cluster.local(proc).size());
    for (std::size_t rank = 0; rank < n; ++rank) rank_of[refs[rank].proc][refs[rank].idx] = rank;

    std::vector<std::size_t> block_start(p + 1, 0);
    for (int proc = 0; proc < p; ++proc)
        block_start[proc + 1] = block_start[proc] + Cluster<Item>::block_size(n, p, proc);
    auto dest_of = [&](std::size_t rank) {
        int d = static_cast<int>(std::upper_bound(block_start.begin(), block_start.end(), rank) -
                                 block_start.begin()) -
                1;
        return d;
    };

    std::vector<std::int64_t> gather(p, p > 1 ? p - 1 : 0);
    cluster.accounting_round(gather, gather);

    // Emitting in ascending rank order per sender makes each destination's
    // arrival order equal to global rank order (equal keys are already
    // rank-ordered by origin), so no information beyond the items themselves
    // is needed to lay out the received block.
    cluster.run_round([&](int proc, std::vector<Item>& items, auto& em) {
        std::vector<std::size_t> order(items.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return rank_of[proc][a] < rank_of[proc][b]; });
        for (std::size_t idx : order) em.send(dest_of(rank_of[proc][idx]), std::move(items[idx]));
        items.clear();
    });

    for (int proc = 0; proc < p; ++proc) {
        auto& l = cluster.local(proc);
        std::stable_sort(l.begin(), l.end(),
                         [&](const Item& a, const Item& b) { return key(a) < key(b); });
    }
}

/// Annotates every item with the inclusive prefix sum of get(item) over the
/// current global order (processor index, then local position), in exactly
/// 2 accounted rounds: a subtotal exchange (each processor forwards its
/// local subtotal to the higher-indexed processors, load < p) and a local
/// fix-up round that carries no messages.
template <typename Item, typename GetFn, typename SetFn>
void mpc_prefix_sum(Cluster<Item>& cluster, GetFn get, SetFn set) {
    const int p = cluster.processors();

    std::vector<std::int64_t> subtotal(p, 0);
    for (int proc = 0; proc < p; ++proc)
        for (const auto& it : cluster.local(proc)) subtotal[proc] += get(it);

    std::vector<std::int64_t> sent(p), received(p);
    for (int proc = 0; proc < p; ++proc) {
        sent[proc] = p - 1 - proc;
        received[proc] = proc;
    }
    cluster.accounting_round(std::move(sent), std::move(received));

    std::vector<std::int64_t> offset(p, 0);
    for (int proc = 1; proc < p; ++proc) offset[proc] = offset[proc - 1] + subtotal[proc - 1];

    cluster.run_round([&](int proc, std::vector<Item>& items, auto&) {
        std::int64_t running = offset[proc];
        for (auto& it : items) {
            running += get(it);
            set(it, running);
        }
    });
}

/// Charges one round in which every processor ends up holding a payload of
/// the given size. Accounted replication-tree style: each processor both
/// sends and receives payload_units, which keeps per-round conservation
/// while charging the contracted received = s on every processor.
template <typename Item>
void broadcast(Cluster<Item>& cluster, std::int64_t payload_units) {
    if (payload_units < 0) throw std::invalid_argument("broadcast: negative payload size");
    std::vector<std::int64_t> units(cluster.processors(), payload_units);
    cluster.accounting_round(units, units);
}

}  // namespace simjoin::mpc
