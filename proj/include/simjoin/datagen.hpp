#pragma once

#include <cstdint>
#include <string>

#include "simjoin/bitvec.hpp"

namespace simjoin {

enum class GenMode { uniform, planted_clusters };

/// Recipe for a synthetic dataset: n points per relation, dimension d, and
/// for planted_clusters mode a number of clusters whose members sit within
/// the given Hamming radius of a random center. Generation is a pure
/// function of the spec.
struct DatasetSpec {
    GenMode mode = GenMode::uniform;
    int n = 0;
    int dim = 1;
    int clusters = 0;
    int cluster_size = 0;
    int radius = 0;
    std::uint64_t seed = 0;
};

/// i.i.d. fair-coin bits for every point of both relations. R ids are
/// 0..n-1, S ids n..2n-1.
Dataset gen_uniform(const DatasetSpec& spec);

/// Cluster centers drawn uniformly; each member equals its center with a
/// uniform count in [0, radius] of bit flips at distinct coordinates, so
/// planted distances are exact. Members alternate between R and S; the
/// remaining points are uniform. clusters == 0 degenerates to gen_uniform.
Dataset gen_planted_clusters(const DatasetSpec& spec);

/// Line-based text format. Header: "SIMJOIN v1 metric=hamming n=<total> d=<D>"
/// where <total> counts both relations' points; body lines "<R|S> <id>
/// <bitstring of length d>", LF endings, ASCII.
void write_dataset(const std::string& path, const Dataset& data);

/// Parses and validates a dataset file: header shape, point count, bit
/// string lengths, per-relation id uniqueness. Throws std::runtime_error
/// with a line-numbered message on malformed input.
Dataset read_dataset(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, for run manifests.
std::uint64_t file_hash(const std::string& path);

}  // namespace simjoin
