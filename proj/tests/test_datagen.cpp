#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "simjoin/datagen.hpp"
#include "simjoin/oracle.hpp"

using namespace simjoin;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/simjoin_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

DatasetSpec uniform_spec(int n, int dim, std::uint64_t seed) {
    DatasetSpec spec;
    spec.mode = GenMode::uniform;
    spec.n = n;
    spec.dim = dim;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    DatasetSpec spec = uniform_spec(64, 32, 99);
    Dataset a = gen_uniform(spec);
    Dataset b = gen_uniform(spec);
    REQUIRE(a.r.size() == b.r.size());
    for (std::size_t i = 0; i < a.r.size(); ++i)
        CHECK(a.r[i].bits.to_string() == b.r[i].bits.to_string());

    spec.seed = 100;
    Dataset c = gen_uniform(spec);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.r.size(); ++i)
        if (a.r[i].bits.to_string() != c.r[i].bits.to_string()) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("uniform generation fills both relations with unique ids") {
    Dataset data = gen_uniform(uniform_spec(50, 16, 1));
    CHECK(data.r.size() == 50);
    CHECK(data.s.size() == 50);
    CHECK(data.dim == 16);
    std::set<std::int64_t> ids;
    for (const auto& pt : data.r) ids.insert(pt.id);
    for (const auto& pt : data.s) ids.insert(pt.id);
    CHECK(ids.size() == 100);
}

TEST_CASE("uniform bits have binomial pairwise distances") {
    // mean pairwise distance over independent uniform points is dim/2 with
    // std dev sqrt(dim)/2 per pair; averaging 2500 pairs tightens it far
    // below the 3-sigma slack used here
    const int dim = 64;
    Dataset data = gen_uniform(uniform_spec(50, dim, 7));
    double total = 0;
    int count = 0;
    for (const auto& x : data.r)
        for (const auto& y : data.s) {
            total += BitVec::hamming(x.bits, y.bits);
            ++count;
        }
    double mean = total / count;
    CHECK(std::abs(mean - dim / 2.0) < 3.0 * (std::sqrt(dim) / 2.0) / std::sqrt(50.0));
}

TEST_CASE("planted clusters stay within the radius") {
    DatasetSpec spec;
    spec.mode = GenMode::planted_clusters;
    spec.n = 64;
    spec.dim = 32;
    spec.clusters = 8;
    spec.cluster_size = 8;
    spec.radius = 3;
    spec.seed = 13;
    Dataset data = gen_planted_clusters(spec);
    CHECK(data.r.size() == 64);
    CHECK(data.s.size() == 64);

    // cluster members alternate R/S, so every cluster contributes 4 points
    // per relation; all within distance 2 * radius of each other
    auto pairs = brute_force_join(data.r, data.s, 2 * spec.radius);
    // each cluster: 4 R members x 4 S members = 16 near pairs at least
    CHECK(pairs.size() >= static_cast<std::size_t>(spec.clusters * 16));
}

TEST_CASE("radius zero plants identical copies") {
    DatasetSpec spec;
    spec.mode = GenMode::planted_clusters;
    spec.n = 16;
    spec.dim = 16;
    spec.clusters = 2;
    spec.cluster_size = 8;
    spec.radius = 0;
    spec.seed = 3;
    Dataset data = gen_planted_clusters(spec);
    auto pairs = brute_force_join(data.r, data.s, 0);
    // every cluster has 4 R copies x 4 S copies of its center
    CHECK(pairs.size() >= 2 * 16);
}

TEST_CASE("zero clusters degenerates to uniform") {
    DatasetSpec spec = uniform_spec(16, 24, 5);
    Dataset uni = gen_uniform(spec);
    spec.mode = GenMode::planted_clusters;
    spec.clusters = 0;
    Dataset planted = gen_planted_clusters(spec);
    REQUIRE(planted.r.size() == uni.r.size());
    for (std::size_t i = 0; i < uni.r.size(); ++i)
        CHECK(planted.r[i].bits.to_string() == uni.r[i].bits.to_string());
}

TEST_CASE("spec validation rejects inconsistent shapes") {
    DatasetSpec spec = uniform_spec(-1, 16, 0);
    CHECK_THROWS_AS(gen_uniform(spec), std::invalid_argument);
    spec = uniform_spec(4, 0, 0);
    CHECK_THROWS_AS(gen_uniform(spec), std::invalid_argument);
    spec = uniform_spec(4, 8, 0);
    spec.mode = GenMode::planted_clusters;
    spec.clusters = 3;
    spec.cluster_size = 4;  // 12 members > n = 4
    CHECK_THROWS_AS(gen_planted_clusters(spec), std::invalid_argument);
    spec.clusters = 1;
    spec.cluster_size = 2;
    spec.radius = 9;  // > dim
    CHECK_THROWS_AS(gen_planted_clusters(spec), std::invalid_argument);
}

TEST_CASE("dataset files round-trip exactly") {
    TempFile file("roundtrip.txt");
    Dataset data = gen_uniform(uniform_spec(20, 40, 77));
    write_dataset(file.path, data);
    Dataset back = read_dataset(file.path);
    CHECK(back.dim == data.dim);
    REQUIRE(back.r.size() == data.r.size());
    REQUIRE(back.s.size() == data.s.size());
    for (std::size_t i = 0; i < data.r.size(); ++i) {
        CHECK(back.r[i].id == data.r[i].id);
        CHECK(back.r[i].bits.to_string() == data.r[i].bits.to_string());
    }
    for (std::size_t i = 0; i < data.s.size(); ++i)
        CHECK(back.s[i].bits.to_string() == data.s[i].bits.to_string());
}

TEST_CASE("reader rejects malformed files") {
    TempFile file("malformed.txt");

    auto write_raw = [&](const std::string& text) {
        std::ofstream out(file.path, std::ios::binary | std::ios::trunc);
        out << text;
    };

    write_raw("not a header\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    write_raw("SIMJOIN v2 metric=hamming n=0 d=4\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    write_raw("SIMJOIN v1 metric=euclid n=0 d=4\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    // body shorter than the header promises
    write_raw("SIMJOIN v1 metric=hamming n=2 d=4\nR 0 0101\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    // wrong bit length
    write_raw("SIMJOIN v1 metric=hamming n=1 d=4\nR 0 01011\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    // duplicate id within a relation
    write_raw("SIMJOIN v1 metric=hamming n=2 d=4\nR 0 0101\nR 0 1111\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    // unknown relation tag
    write_raw("SIMJOIN v1 metric=hamming n=1 d=4\nT 0 0101\n");
    CHECK_THROWS_AS(read_dataset(file.path), std::runtime_error);

    CHECK_THROWS_AS(read_dataset("/tmp/simjoin_test_does_not_exist.txt"), std::runtime_error);
}

TEST_CASE("file hash changes with content") {
    TempFile a("hash_a.txt"), b("hash_b.txt");
    write_dataset(a.path, gen_uniform(uniform_spec(8, 8, 1)));
    write_dataset(b.path, gen_uniform(uniform_spec(8, 8, 2)));
    CHECK(file_hash(a.path) != file_hash(b.path));
    CHECK(file_hash(a.path) == file_hash(a.path));
}
