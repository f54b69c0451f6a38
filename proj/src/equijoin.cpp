#include "simjoin/equijoin.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "simjoin/rng.hpp"

namespace simjoin {

namespace {

std::uint64_t fold_key(const TupleKey& k) {
    std::uint64_t h = mix64(k.hash.hi);
    h = mix64(h ^ k.hash.lo);
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.level)) << 32 |
                   static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.repetition))));
    return h;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

struct GroupInfo {
    TupleKey key;
    std::int64_t r_count = 0;
    std::int64_t s_count = 0;
    std::int64_t out = 0;   // r_count * s_count
    std::int64_t slots = 0; // processor slots from largest-remainder allocation
    // grid shape (slots >= 1 only)
    std::int64_t cell_base = -1;
    std::int64_t a = 0, b = 0;          // rows (R chunks) x columns (S chunks)
    std::int64_t chunk_r = 0, chunk_s = 0;
    int shared_proc = -1;               // slots == 0: hashed shared processor
};

auto sort_key(const KeyedTuple& t) {
    return std::tuple(t.key.level, t.key.repetition, t.key.hash.hi, t.key.hash.lo,
                      static_cast<int>(t.rel));
}

}  // namespace

EquiJoinStats equi_join(mpc::Cluster<KeyedTuple>& cluster, const PairSink& sink) {
    const int p = cluster.processors();
    const int rounds_before = cluster.round_count();
    EquiJoinStats stats;
    stats.tuples_in = static_cast<std::int64_t>(cluster.total_items());

    // Rounds 1-2: global sort by key, R tuples ahead of S within each group.
    mpc_sort(cluster, sort_key);

    // Rounds 3-6: per-key relation counts via two prefix sums.
    mpc_prefix_sum(
        cluster, [](const KeyedTuple& t) { return t.rel == Relation::R ? 1 : 0; },
        [](KeyedTuple& t, std::int64_t v) { t.ann_a = v; });
    mpc_prefix_sum(
        cluster, [](const KeyedTuple& t) { return t.rel == Relation::S ? 1 : 0; },
        [](KeyedTuple& t, std::int64_t v) { t.ann_b = v; });

    // Group scan over the sorted global order (processor index, then local
    // position). group_of[proc][idx] = index into groups.
    std::vector<GroupInfo> groups;
    std::vector<std::vector<std::size_t>> group_of(p);
    for (int proc = 0; proc < p; ++proc) {
        const auto& items = cluster.local(proc);
        group_of[proc].resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& t = items[i];
            if (groups.empty() || !(groups.back().key == t.key)) {
                GroupInfo g;
                g.key = t.key;
                groups.push_back(g);
            }
            auto& g = groups.back();
            if (t.rel == Relation::R)
                ++g.r_count;
            else
                ++g.s_count;
            group_of[proc][i] = groups.size() - 1;
        }
    }

    std::int64_t out_total = 0;
    for (auto& g : groups) {
        g.out = g.r_count * g.s_count;
        out_total += g.out;
    }

    // Largest-remainder allocation of the p processor slots over keys with
    // output, proportional to p * O_g / O_total. Keys left with 0 slots are
    // packed onto shared processors by key hash.
    if (out_total > 0) {
        std::int64_t assigned = 0;
        std::vector<std::pair<long double, std::size_t>> fracs;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            auto& g = groups[gi];
            if (g.out == 0) continue;
            long double raw = static_cast<long double>(p) * g.out / out_total;
            g.slots = static_cast<std::int64_t>(raw);
            assigned += g.slots;
            fracs.emplace_back(raw - g.slots, gi);
        }
        std::int64_t leftover = p - assigned;
        std::stable_sort(fracs.begin(), fracs.end(), [](const auto& x, const auto& y) {
            return x.first > y.first;  // stable: ties keep key order
        });
        for (std::size_t i = 0; i < fracs.size() && leftover > 0; ++i, --leftover)
            ++groups[fracs[i].second].slots;
    }

    // Grid shape per multi-slot key: a x b cells (R split into a row chunks,
    // S into b column chunks) minimizing the per-cell share
    // ceil(|R_g|/a) + ceil(|S_g|/b), ties to smaller a.
    struct Cell {
        std::size_t group;
        std::int64_t estimate;
        int proc = -1;
    };
    std::vector<Cell> cells;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        auto& g = groups[gi];
        if (g.out == 0) continue;
        if (g.slots == 0) {
            g.shared_proc = static_cast<int>(fold_key(g.key) % static_cast<std::uint64_t>(p));
            continue;
        }
        std::int64_t best_a = 1, best_b = g.slots, best_cost = -1;
        for (std::int64_t a = 1; a <= g.slots; ++a) {
            std::int64_t b = g.slots / a;
            std::int64_t cost = ceil_div(g.r_count, a) + ceil_div(g.s_count, b);
            if (best_cost < 0 || cost < best_cost) {
                best_cost = cost;
                best_a = a;
                best_b = b;
            }
        }
        g.a = best_a;
        g.b = best_b;
        g.chunk_r = ceil_div(g.r_count, g.a);
        g.chunk_s = ceil_div(g.s_count, g.b);
        g.cell_base = static_cast<std::int64_t>(cells.size());
        std::int64_t estimate = g.chunk_r + g.chunk_s;
        for (std::int64_t i = 0; i < g.a * g.b; ++i) cells.push_back({gi, estimate, -1});
    }

    // Longest-processing-time packing of cells onto processors by estimated
    // per-cell share; deterministic ties (larger estimate first, then cell
    // id; least-loaded processor, then lowest index).
    {
        std::vector<std::size_t> order(cells.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return cells[x].estimate > cells[y].estimate;
        });
        std::vector<std::int64_t> packed(p, 0);
        for (std::size_t ci : order) {
            int best = 0;
            for (int proc = 1; proc < p; ++proc)
                if (packed[proc] < packed[best]) best = proc;
            cells[ci].proc = best;
            packed[best] += cells[ci].estimate;
        }
    }

    // Round 7: broadcast the slot table (grid shapes and cell placements for
    // the at most p multi-slot keys; shared keys need no table entry because
    // their processor is a hash of the key).
    mpc::broadcast(cluster, 1 + 2 * static_cast<std::int64_t>(cells.size()));

    // Round 8 (scatter): every tuple moves once, to its home cell. An R
    // tuple of row chunk i lands on cell (i, rank mod b); an S tuple of
    // column chunk j on cell (rank mod a, j). Tuples of keys without output
    // are dropped here: they cannot contribute a pair.
    struct Target {
        int dest = -1;
        std::int64_t cell = -1;
    };
    std::vector<std::vector<Target>> plan(p);
    {
        std::vector<std::int64_t> r_seen(groups.size(), 0), s_seen(groups.size(), 0);
        for (int proc = 0; proc < p; ++proc) {
            const auto& items = cluster.local(proc);
            plan[proc].resize(items.size());
            for (std::size_t i = 0; i < items.size(); ++i) {
                const std::size_t gi = group_of[proc][i];
                const auto& g = groups[gi];
                if (g.out == 0) continue;
                Target tg;
                if (g.slots == 0) {
                    tg.dest = g.shared_proc;
                    tg.cell = -1;
                } else if (cluster.local(proc)[i].rel == Relation::R) {
                    std::int64_t rank = r_seen[gi]++;
                    std::int64_t row = rank / g.chunk_r;
                    std::int64_t j0 = rank % g.b;
                    tg.cell = g.cell_base + row * g.b + j0;
                    tg.dest = cells[static_cast<std::size_t>(tg.cell)].proc;
                } else {
                    std::int64_t rank = s_seen[gi]++;
                    std::int64_t col = rank / g.chunk_s;
                    std::int64_t i0 = rank % g.a;
                    tg.cell = g.cell_base + i0 * g.b + col;
                    tg.dest = cells[static_cast<std::size_t>(tg.cell)].proc;
                }
                plan[proc][i] = tg;
            }
        }
    }
    cluster.run_round([&](int proc, std::vector<KeyedTuple>& items, auto& em) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            const Target& tg = plan[proc][i];
            if (tg.dest < 0) continue;
            KeyedTuple t = std::move(items[i]);
            t.cell = tg.cell;
            em.send(tg.dest, std::move(t));
        }
        items.clear();
    });

    // Round 9 (gather): each home cell forwards its R tuples along its grid
    // row and its S tuples along its grid column, completing the replication
    // without concentrating the fan-out on the original holders.
    cluster.run_round([&](int /*proc*/, std::vector<KeyedTuple>& items, auto& em) {
        for (const auto& t : items) {
            if (t.cell < 0) continue;  // shared key: single cell, no replicas
            const auto& g = groups[cells[static_cast<std::size_t>(t.cell)].group];
            std::int64_t off = t.cell - g.cell_base;
            std::int64_t row = off / g.b, col = off % g.b;
            if (t.rel == Relation::R) {
                for (std::int64_t j = 0; j < g.b; ++j) {
                    if (j == col) continue;
                    KeyedTuple copy = t;
                    copy.cell = g.cell_base + row * g.b + j;
                    em.send(cells[static_cast<std::size_t>(copy.cell)].proc, std::move(copy));
                }
            } else {
                for (std::int64_t i = 0; i < g.a; ++i) {
                    if (i == row) continue;
                    KeyedTuple copy = t;
                    copy.cell = g.cell_base + i * g.b + col;
                    em.send(cells[static_cast<std::size_t>(copy.cell)].proc, std::move(copy));
                }
            }
        }
    });

    // Local materialization: on each processor, bucket by (cell, key) and
    // emit the cross product. Each pair exists on exactly one processor: a
    // grid pair meets only at (row of x, column of y); a shared key lives
    // wholly on one processor.
    for (int proc = 0; proc < p; ++proc) {
        std::map<std::pair<std::int64_t, TupleKey>, std::pair<std::vector<const KeyedTuple*>,
                                                              std::vector<const KeyedTuple*>>>
            buckets;
        for (const auto& t : cluster.local(proc)) {
            auto& bucket = buckets[{t.cell, t.key}];
            if (t.rel == Relation::R)
                bucket.first.push_back(&t);
            else
                bucket.second.push_back(&t);
        }
        for (const auto& [bk, bucket] : buckets) {
            for (const auto* x : bucket.first)
                for (const auto* y : bucket.second) {
                    sink(*x, *y);
                    ++stats.pairs_emitted;
                }
        }
    }

    stats.rounds = cluster.round_count() - rounds_before;
    return stats;
}

double join_load_bound(double n, double out, int p) {
    return std::sqrt(out / p) + n / p;
}

}  // namespace simjoin
