#include "simjoin/lsh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "simjoin/rng.hpp"

namespace simjoin {

LshParams bit_sampling_family(int dim, int r, double c) {
    if (dim < 1) throw std::invalid_argument("bit_sampling_family: dim must be >= 1");
    if (r < 1) throw std::invalid_argument("bit_sampling_family: r must be >= 1");
    if (!(c > 1.0)) throw std::invalid_argument("bit_sampling_family: c must be > 1");
    // c*r == dim would give p2 = 0 and leave rho undefined, so the whole
    // closed boundary is rejected, not just c*r > dim.
    if (!(c * r < static_cast<double>(dim)))
        throw std::invalid_argument("bit_sampling_family: c*r must be < dim (p2 would be 0)");

    LshParams p;
    p.dim = dim;
    p.r = r;
    p.c = c;
    p.p1 = 1.0 - static_cast<double>(r) / dim;
    p.p2 = 1.0 - c * static_cast<double>(r) / dim;
    p.rho = std::log(p.p1) / std::log(p.p2);
    return p;
}

HashValue eval_hash(const HashFunctionSpec& spec, const BitVec& x) {
    if (spec.dim != x.dim())
        throw std::invalid_argument("eval_hash: spec dimension " + std::to_string(spec.dim) +
                                    " does not match point dimension " + std::to_string(x.dim()));
    if (spec.level < 1) throw std::invalid_argument("eval_hash: level must be >= 1");

    HashValue v;
    v.hi = mix64(spec.seed ^
                 mix64(static_cast<std::uint64_t>(spec.level) * 0x9e3779b97f4a7c15ULL +
                       static_cast<std::uint64_t>(spec.repetition)));

    SplitMix64 rng(spec.seed);
    const auto dim = static_cast<std::uint64_t>(spec.dim);
    for (int m = 0; m < spec.level; ++m) {
        int coord = static_cast<int>(rng.next_below(dim));
        std::uint64_t bit = x.get(coord) ? 1u : 0u;
        if (m < 64)
            v.lo |= bit << m;
        else
            v.hi = mix64(v.hi ^ ((static_cast<std::uint64_t>(m) << 1) | bit));
    }
    return v;
}

double collision_probability(const LshParams& params, int distance, int level) {
    if (distance < 0 || distance > params.dim)
        throw std::invalid_argument("collision_probability: distance must be in [0, dim]");
    if (level < 1) throw std::invalid_argument("collision_probability: level must be >= 1");
    return std::pow(1.0 - static_cast<double>(distance) / params.dim, level);
}

int kappa(const LshParams& params, int processors) {
    if (processors < 1) throw std::invalid_argument("kappa: processors must be >= 1");
    double raw = (params.rho / (1.0 + params.rho)) *
                 (std::log(static_cast<double>(processors)) / std::log(1.0 / params.p1));
    // The guard keeps values that are integral up to rounding noise from
    // being bumped a whole level.
    int k = static_cast<int>(std::ceil(raw - 1e-9));
    return k < 1 ? 1 : k;
}

}  // namespace simjoin
