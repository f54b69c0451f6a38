#pragma once

#include <cstdint>
#include <initializer_list>

namespace simjoin {

// SplitMix64: tiny counter-based generator. Every random choice in the
// library is derived from a master seed through derive_seed so that runs
// are reproducible across platforms and independent of evaluation order.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, bound). Modulo bias is negligible for the bounds
    // used here (bound << 2^64) and vanishes for powers of two.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

    double next_unit() { return (next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Splittable seed derivation: fold a list of stream identifiers (phase,
// repetition, level, ...) into the master seed. Each distinct identifier
// list yields an independent stream.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t part : parts) {
        h = mix64(h ^ (part + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    }
    return h;
}

// Stream tags used with derive_seed. Keeping them in one place guarantees
// that unrelated stages never consume the same stream.
namespace seed_tag {
constexpr std::uint64_t repetition = 1;
constexpr std::uint64_t phase_spec = 2;
constexpr std::uint64_t estimator_spec = 3;
constexpr std::uint64_t bucket_tree = 4;
constexpr std::uint64_t datagen_uniform = 5;
constexpr std::uint64_t datagen_center = 6;
constexpr std::uint64_t datagen_member = 7;
}  // namespace seed_tag

}  // namespace simjoin
