#include "simjoin/datagen.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "simjoin/rng.hpp"

namespace simjoin {

namespace {

void validate(const DatasetSpec& spec) {
    if (spec.n < 0) throw std::invalid_argument("dataset spec: n must be >= 0");
    if (spec.dim < 1) throw std::invalid_argument("dataset spec: dim must be >= 1");
    if (spec.mode == GenMode::planted_clusters) {
        if (spec.clusters < 0 || spec.cluster_size < 0)
            throw std::invalid_argument("dataset spec: negative cluster shape");
        if (static_cast<long long>(spec.clusters) * spec.cluster_size > spec.n)
            throw std::invalid_argument("dataset spec: clusters * cluster_size must be <= n");
        if (spec.radius < 0 || spec.radius > spec.dim)
            throw std::invalid_argument("dataset spec: radius must be in [0, dim]");
    }
}

BitVec random_bits(int dim, SplitMix64& rng) {
    BitVec v(dim);
    for (int i = 0; i < dim; ++i)
        if (rng.next() & 1u) v.set(i, true);
    return v;
}

BitVec uniform_point(const DatasetSpec& spec, int rel, int index) {
    SplitMix64 rng(derive_seed(spec.seed, {seed_tag::datagen_uniform,
                                           static_cast<std::uint64_t>(rel),
                                           static_cast<std::uint64_t>(index)}));
    return random_bits(spec.dim, rng);
}

/// Flips `flips` distinct coordinates chosen by a partial Fisher-Yates pass.
void flip_distinct(BitVec& v, int flips, SplitMix64& rng) {
    std::vector<int> coords(v.dim());
    std::iota(coords.begin(), coords.end(), 0);
    for (int i = 0; i < flips; ++i) {
        std::uint64_t j = i + rng.next_below(coords.size() - i);
        std::swap(coords[i], coords[j]);
        v.flip(coords[i]);
    }
}

}  // namespace

Dataset gen_uniform(const DatasetSpec& spec) {
    validate(spec);
    Dataset data;
    data.dim = spec.dim;
    for (int i = 0; i < spec.n; ++i)
        data.r.push_back({i, Relation::R, uniform_point(spec, 0, i)});
    for (int i = 0; i < spec.n; ++i)
        data.s.push_back({spec.n + i, Relation::S, uniform_point(spec, 1, i)});
    return data;
}

Dataset gen_planted_clusters(const DatasetSpec& spec) {
    validate(spec);
    if (spec.clusters == 0) return gen_uniform(spec);

    Dataset data;
    data.dim = spec.dim;
    std::vector<BitVec> members_r, members_s;
    for (int c = 0; c < spec.clusters; ++c) {
        SplitMix64 center_rng(derive_seed(spec.seed, {seed_tag::datagen_center,
                                                      static_cast<std::uint64_t>(c)}));
        BitVec center = random_bits(spec.dim, center_rng);
        for (int m = 0; m < spec.cluster_size; ++m) {
            SplitMix64 rng(derive_seed(spec.seed, {seed_tag::datagen_member,
                                                   static_cast<std::uint64_t>(c),
                                                   static_cast<std::uint64_t>(m)}));
            BitVec point = center;
            int flips = static_cast<int>(rng.next_below(spec.radius + 1));
            flip_distinct(point, flips, rng);
            (m % 2 == 0 ? members_r : members_s).push_back(std::move(point));
        }
    }

    for (int i = 0; i < spec.n; ++i) {
        BitVec bits = static_cast<std::size_t>(i) < members_r.size()
                          ? members_r[i]
                          : uniform_point(spec, 0, i);
        data.r.push_back({i, Relation::R, std::move(bits)});
    }
    for (int i = 0; i < spec.n; ++i) {
        BitVec bits = static_cast<std::size_t>(i) < members_s.size()
                          ? members_s[i]
                          : uniform_point(spec, 1, i);
        data.s.push_back({spec.n + i, Relation::S, std::move(bits)});
    }
    return data;
}

void write_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
    out << "SIMJOIN v1 metric=hamming n=" << data.total_points() << " d=" << data.dim << "\n";
    for (const auto& pt : data.r) out << "R " << pt.id << " " << pt.bits.to_string() << "\n";
    for (const auto& pt : data.s) out << "S " << pt.id << " " << pt.bits.to_string() << "\n";
    if (!out) throw std::runtime_error("write_dataset: write failed for " + path);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_dataset: cannot open " + path);

    std::string header;
    if (!std::getline(in, header) || header.empty())
        throw std::runtime_error("read_dataset: missing header in " + path);
    std::istringstream hs(header);
    std::string magic, version, metric, n_field, d_field;
    hs >> magic >> version >> metric >> n_field >> d_field;
    if (magic != "SIMJOIN" || version != "v1" || metric != "metric=hamming" ||
        n_field.rfind("n=", 0) != 0 || d_field.rfind("d=", 0) != 0)
        throw std::runtime_error("read_dataset: malformed header: " + header);
    std::size_t expected_n = 0;
    int dim = 0;
    try {
        expected_n = std::stoull(n_field.substr(2));
        dim = std::stoi(d_field.substr(2));
    } catch (const std::exception&) {
        throw std::runtime_error("read_dataset: malformed header numbers: " + header);
    }
    if (dim < 1) throw std::runtime_error("read_dataset: header d must be >= 1");

    Dataset data;
    data.dim = dim;
    std::set<std::int64_t> seen_r, seen_s;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, bits;
        std::int64_t id = 0;
        if (!(ls >> tag >> id >> bits) || (tag != "R" && tag != "S"))
            throw std::runtime_error("read_dataset: malformed line " + std::to_string(line_no));
        if (static_cast<int>(bits.size()) != dim)
            throw std::runtime_error("read_dataset: line " + std::to_string(line_no) +
                                     ": bit string length " + std::to_string(bits.size()) +
                                     " != d=" + std::to_string(dim));
        auto& seen = tag == "R" ? seen_r : seen_s;
        if (!seen.insert(id).second)
            throw std::runtime_error("read_dataset: line " + std::to_string(line_no) +
                                     ": duplicate id " + std::to_string(id) + " in " + tag);
        Relation rel = tag == "R" ? Relation::R : Relation::S;
        auto& side = tag == "R" ? data.r : data.s;
        side.push_back({id, rel, BitVec::from_string(bits)});
    }
    if (data.total_points() != expected_n)
        throw std::runtime_error("read_dataset: header n=" + std::to_string(expected_n) +
                                 " but file has " + std::to_string(data.total_points()) +
                                 " points");
    return data;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_hash: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

}  // namespace simjoin
