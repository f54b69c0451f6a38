#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "simjoin/equijoin.hpp"
#include "simjoin/rng.hpp"

using namespace simjoin;

namespace {

KeyedTuple make_tuple(std::uint64_t key_word, Relation rel, std::int64_t id) {
    KeyedTuple t;
    t.key.level = 1;
    t.key.repetition = 0;
    t.key.hash = HashValue{key_word, key_word};
    t.rel = rel;
    t.id = id;
    return t;
}

using Pair = std::pair<std::int64_t, std::int64_t>;

/// Reference join: every (R, S) pair sharing a key, as a multiset.
std::multiset<Pair> nested_loop(const std::vector<KeyedTuple>& tuples) {
    std::multiset<Pair> out;
    for (const auto& a : tuples)
        for (const auto& b : tuples)
            if (a.rel == Relation::R && b.rel == Relation::S && a.key == b.key)
                out.insert({a.id, b.id});
    return out;
}

std::multiset<Pair> run_join(const std::vector<KeyedTuple>& tuples, int p,
                             EquiJoinStats* stats_out = nullptr) {
    mpc::Cluster<KeyedTuple> cluster(p);
    cluster.seed_items(tuples);
    std::multiset<Pair> got;
    EquiJoinStats stats = equi_join(cluster, [&](const KeyedTuple& a, const KeyedTuple& b) {
        got.insert({a.id, b.id});
    });
    if (stats_out != nullptr) *stats_out = stats;
    return got;
}

}  // namespace

TEST_CASE("small join emits each matching pair exactly once") {
    std::vector<KeyedTuple> tuples{
        make_tuple(1, Relation::R, 10), make_tuple(1, Relation::R, 11),
        make_tuple(2, Relation::R, 12), make_tuple(1, Relation::S, 20),
        make_tuple(3, Relation::S, 21),
    };
    auto got = run_join(tuples, 3);
    std::multiset<Pair> want{{10, 20}, {11, 20}};
    CHECK(got == want);
}

TEST_CASE("join with an empty side emits nothing") {
    std::vector<KeyedTuple> tuples{make_tuple(1, Relation::R, 1), make_tuple(2, Relation::R, 2)};
    CHECK(run_join(tuples, 2).empty());
    CHECK(run_join({}, 4).empty());
}

TEST_CASE("single hot key is spread over a processor grid") {
    std::vector<KeyedTuple> tuples;
    for (int i = 0; i < 64; ++i) tuples.push_back(make_tuple(7, Relation::R, i));
    for (int i = 0; i < 64; ++i) tuples.push_back(make_tuple(7, Relation::S, 100 + i));

    mpc::Cluster<KeyedTuple> cluster(16);
    cluster.seed_items(tuples);
    std::int64_t pairs = 0;
    equi_join(cluster, [&](const KeyedTuple&, const KeyedTuple&) { ++pairs; });
    CHECK(pairs == 64 * 64);

    // 4096 outputs over p=16: bound sqrt(4096/16) + 128/16 = 24; the
    // grid keeps every round's fan-in and fan-out near the cell share
    CHECK(load_summary(cluster).max_load() <= 8 * 24);
}

TEST_CASE("randomized joins match the nested-loop reference") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        int p = 1 + static_cast<int>(rng.next() % 8);
        int n = static_cast<int>(rng.next() % 120);
        int key_space = 1 + static_cast<int>(rng.next() % 6);
        std::vector<KeyedTuple> tuples;
        for (int i = 0; i < n; ++i) {
            Relation rel = (rng.next() & 1) != 0 ? Relation::R : Relation::S;
            tuples.push_back(make_tuple(rng.next() % key_space, rel, i));
        }
        EquiJoinStats stats;
        auto got = run_join(tuples, p, &stats);
        CHECK(got == nested_loop(tuples));
        CHECK(stats.tuples_in == n);
    }
}

TEST_CASE("join always takes the same number of rounds") {
    std::vector<int> counts;
    for (int n : {0, 5, 64, 300}) {
        std::vector<KeyedTuple> tuples;
        SplitMix64 rng(n);
        for (int i = 0; i < n; ++i)
            tuples.push_back(make_tuple(rng.next() % 4,
                                        (rng.next() & 1) != 0 ? Relation::R : Relation::S, i));
        EquiJoinStats stats;
        run_join(tuples, 4, &stats);
        counts.push_back(stats.rounds);
    }
    for (int c : counts) CHECK(c == counts.front());
    CHECK(counts.front() == 9);
}

TEST_CASE("reference load bound arithmetic") {
    CHECK(join_load_bound(4096, 4096, 16) == doctest::Approx(272.0).epsilon(1e-12));
    CHECK(join_load_bound(0, 0, 8) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(join_load_bound(16, 0, 4) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("distinct key fields never join") {
    KeyedTuple a = make_tuple(5, Relation::R, 1);
    KeyedTuple b = make_tuple(5, Relation::S, 2);
    b.key.level = 2;  // same hash, different level
    KeyedTuple c = make_tuple(5, Relation::S, 3);
    c.key.repetition = 1;  // same hash, different draw
    auto got = run_join({a, b, c}, 2);
    CHECK(got.empty());
}
