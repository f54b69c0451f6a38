#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "simjoin/mpc.hpp"
#include "simjoin/rng.hpp"

using namespace simjoin;

namespace {

struct Rec {
    std::int64_t key = 0;
    std::int64_t tag = 0;
    std::int64_t acc = 0;
};

std::vector<std::int64_t> gathered_keys(const mpc::Cluster<Rec>& cluster) {
    std::vector<std::int64_t> keys;
    for (int proc = 0; proc < cluster.processors(); ++proc)
        for (const Rec& rec : cluster.local(proc)) keys.push_back(rec.key);
    return keys;
}

}  // namespace

TEST_CASE("cluster rejects nonpositive processor counts") {
    CHECK_THROWS_AS(mpc::Cluster<Rec>(0), std::invalid_argument);
    CHECK_THROWS_AS(mpc::Cluster<Rec>(-3), std::invalid_argument);
}

TEST_CASE("seeding splits items into near-equal blocks") {
    mpc::Cluster<Rec> cluster(4);
    std::vector<Rec> items(10);
    for (int i = 0; i < 10; ++i) items[i].key = i;
    cluster.seed_items(items);
    CHECK(cluster.total_items() == 10);
    std::vector<std::size_t> sizes;
    for (int proc = 0; proc < 4; ++proc) sizes.push_back(cluster.local(proc).size());
    std::size_t lo = *std::min_element(sizes.begin(), sizes.end());
    std::size_t hi = *std::max_element(sizes.begin(), sizes.end());
    CHECK(hi - lo <= 1);
    CHECK(cluster.round_count() == 0);  // seeding is free
}

TEST_CASE("round load records sent and received per processor") {
    mpc::Cluster<Rec> cluster(4);
    std::vector<Rec> items(4);
    for (int i = 0; i < 4; ++i) items[i].key = i;
    cluster.seed_items(items);

    // all-to-all: every processor sends its item to every processor,
    // including itself
    cluster.run_round([&](int, std::vector<Rec>& local, mpc::Cluster<Rec>::Emitter& out) {
        for (const Rec& rec : local)
            for (int dest = 0; dest < 4; ++dest) out.send(dest, rec);
        local.clear();
    });

    const mpc::LoadReport& report = load_summary(cluster);
    REQUIRE(report.per_round.size() == 1);
    for (int proc = 0; proc < 4; ++proc) {
        CHECK(report.per_round[0].sent[proc] == 4);
        CHECK(report.per_round[0].received[proc] == 4);
    }
    CHECK(report.max_load() == 4);
    CHECK(cluster.total_items() == 16);
}

TEST_CASE("emitter rejects out-of-range destinations") {
    mpc::Cluster<Rec> cluster(2);
    cluster.seed_items({Rec{1, 0, 0}});
    CHECK_THROWS_AS(
        cluster.run_round([](int, std::vector<Rec>& local, mpc::Cluster<Rec>::Emitter& out) {
            if (!local.empty()) out.send(5, local.front());
        }),
        std::out_of_range);
}

TEST_CASE("accounting round enforces conservation") {
    mpc::Cluster<Rec> cluster(3);
    CHECK_THROWS_AS(cluster.accounting_round({1, 0, 0}, {0, 0, 0}), std::logic_error);
    CHECK_THROWS_AS(cluster.accounting_round({1, 0}, {1, 0, 0}), std::invalid_argument);
    cluster.accounting_round({2, 0, 1}, {1, 1, 1});
    CHECK(cluster.round_count() == 1);
}

TEST_CASE("empty load report has zero maximum load") {
    mpc::Cluster<Rec> cluster(3);
    CHECK(load_summary(cluster).max_load() == 0);
    CHECK(load_summary(cluster).rounds() == 0);
}

TEST_CASE("distributed sort produces globally sorted blocks in two rounds") {
    mpc::Cluster<Rec> cluster(4);
    SplitMix64 rng(17);
    std::vector<Rec> items(37);
    for (std::size_t i = 0; i < items.size(); ++i) {
        items[i].key = static_cast<std::int64_t>(rng.next() % 50);
        items[i].tag = static_cast<std::int64_t>(i);
    }
    cluster.seed_items(items);

    int before = cluster.round_count();
    mpc::mpc_sort(cluster, [](const Rec& rec) { return rec.key; });
    CHECK(cluster.round_count() - before == 2);

    std::vector<std::int64_t> keys = gathered_keys(cluster);
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(keys.size() == items.size());

    // block sizes stay balanced
    std::vector<std::size_t> sizes;
    for (int proc = 0; proc < 4; ++proc) sizes.push_back(cluster.local(proc).size());
    CHECK(*std::max_element(sizes.begin(), sizes.end()) -
              *std::min_element(sizes.begin(), sizes.end()) <=
          1);
}

TEST_CASE("sort is stable across equal keys by origin") {
    mpc::Cluster<Rec> cluster(3);
    std::vector<Rec> items(9);
    for (int i = 0; i < 9; ++i) {
        items[i].key = 7;  // all equal
        items[i].tag = i;
    }
    cluster.seed_items(items);
    mpc::mpc_sort(cluster, [](const Rec& rec) { return rec.key; });

    std::vector<std::int64_t> tags;
    for (int proc = 0; proc < 3; ++proc)
        for (const Rec& rec : cluster.local(proc)) tags.push_back(rec.tag);
    CHECK(std::is_sorted(tags.begin(), tags.end()));
}

TEST_CASE("sort on a single processor still charges two rounds") {
    mpc::Cluster<Rec> cluster(1);
    cluster.seed_items({Rec{3, 0, 0}, Rec{1, 1, 0}, Rec{2, 2, 0}});
    mpc::mpc_sort(cluster, [](const Rec& rec) { return rec.key; });
    CHECK(cluster.round_count() == 2);
    CHECK(gathered_keys(cluster) == std::vector<std::int64_t>{1, 2, 3});
}

TEST_CASE("prefix sum is inclusive over the global order") {
    mpc::Cluster<Rec> cluster(4);
    std::vector<Rec> items(4);
    std::vector<std::int64_t> vals{3, 0, 2, 5};
    for (int i = 0; i < 4; ++i) items[i].key = vals[i];
    cluster.seed_items(items);

    int before = cluster.round_count();
    mpc::mpc_prefix_sum(
        cluster, [](const Rec& rec) { return rec.key; },
        [](Rec& rec, std::int64_t sum) { rec.acc = sum; });
    CHECK(cluster.round_count() - before == 2);

    std::vector<std::int64_t> acc;
    for (int proc = 0; proc < 4; ++proc)
        for (const Rec& rec : cluster.local(proc)) acc.push_back(rec.acc);
    CHECK(acc == std::vector<std::int64_t>{3, 3, 5, 10});
}

TEST_CASE("prefix sum with several items per processor") {
    mpc::Cluster<Rec> cluster(2);
    std::vector<Rec> items(4);
    for (int i = 0; i < 4; ++i) items[i].key = 1;
    cluster.seed_items(items);
    mpc::mpc_prefix_sum(
        cluster, [](const Rec& rec) { return rec.key; },
        [](Rec& rec, std::int64_t sum) { rec.acc = sum; });
    std::vector<std::int64_t> acc;
    for (int proc = 0; proc < 2; ++proc)
        for (const Rec& rec : cluster.local(proc)) acc.push_back(rec.acc);
    CHECK(acc == std::vector<std::int64_t>{1, 2, 3, 4});
}

TEST_CASE("broadcast charges the payload on every processor") {
    mpc::Cluster<Rec> cluster(4);
    mpc::broadcast(cluster, 7);
    const mpc::LoadReport& report = load_summary(cluster);
    REQUIRE(report.per_round.size() == 1);
    for (int proc = 0; proc < 4; ++proc) {
        CHECK(report.per_round[0].sent[proc] == 7);
        CHECK(report.per_round[0].received[proc] == 7);
    }
    CHECK_THROWS_AS(mpc::broadcast(cluster, -1), std::invalid_argument);
}

TEST_CASE("simulation is deterministic") {
    auto run = [] {
        mpc::Cluster<Rec> cluster(4);
        SplitMix64 rng(123);
        std::vector<Rec> items(25);
        for (std::size_t i = 0; i < items.size(); ++i) {
            items[i].key = static_cast<std::int64_t>(rng.next() % 11);
            items[i].tag = static_cast<std::int64_t>(i);
        }
        cluster.seed_items(items);
        mpc::mpc_sort(cluster, [](const Rec& rec) { return rec.key; });
        std::vector<std::pair<std::int64_t, std::int64_t>> out;
        for (int proc = 0; proc < 4; ++proc)
            for (const Rec& rec : cluster.local(proc)) out.emplace_back(rec.key, rec.tag);
        return out;
    };
    CHECK(run() == run());
}
