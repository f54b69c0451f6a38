#pragma once

#include <cstdint>
#include <tuple>

#include "simjoin/bitvec.hpp"

namespace simjoin {

/// Parameters of a bit-sampling LSH family for Hamming distance on
/// {0,1}^dim with near threshold r and approximation factor c.
///
/// A single atomic hash samples one coordinate uniformly at random, so two
/// points at distance t collide with probability exactly 1 - t/dim. Hence
/// p1 = 1 - r/dim, p2 = 1 - c*r/dim and rho = ln(1/p1) / ln(1/p2).
struct LshParams {
    int dim = 0;
    int r = 0;
    double c = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double rho = 0.0;
};

LshParams bit_sampling_family(int dim, int r, double c);

/// Identity of one level-k concatenated hash function. `level` is the
/// number of sampled coordinates k; `repetition` distinguishes the
/// functions drawn at the same level. Evaluation is a pure function of
/// (spec, point bits).
struct HashFunctionSpec {
    int level = 0;
    int repetition = 0;
    std::uint64_t seed = 0;
    int dim = 0;
};

/// 128-bit digest: the sampled bit values packed together with the spec
/// identity. Digest equality defines bucket membership. For level <= 64
/// the packing is exact, so two points collide under the same spec if and
/// only if they agree on all sampled coordinates; deeper levels fold the
/// remaining bits into the identity half.
struct HashValue {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    bool operator==(const HashValue&) const = default;
    auto operator<=>(const HashValue&) const = default;
};

HashValue eval_hash(const HashFunctionSpec& spec, const BitVec& x);

/// Collision probability of a level-k concatenation at a given distance:
/// (1 - distance/dim)^k, exact for sampling with replacement.
double collision_probability(const LshParams& params, int distance, int level);

/// Deepest level used by the join:
/// kappa = max(1, ceil((rho/(1+rho)) * log_{1/p1}(p))).
int kappa(const LshParams& params, int processors);

}  // namespace simjoin
