#pragma once

#include <cstdint>
#include <vector>

#include "simjoin/bitvec.hpp"
#include "simjoin/lsh.hpp"

namespace simjoin {

/// One reported join pair with its exact Hamming distance.
struct PairRecord {
    std::int64_t r_id = 0;
    std::int64_t s_id = 0;
    int distance = 0;

    friend bool operator==(const PairRecord&, const PairRecord&) = default;
    friend auto operator<=>(const PairRecord&, const PairRecord&) = default;
};

/// Exact distance join: all (x, y) in R x S with hamming(x, y) <= r, sorted
/// by (r_id, s_id). Guarded to |R|*|S| <= 1e8.
std::vector<PairRecord> brute_force_join(const std::vector<Point>& R,
                                         const std::vector<Point>& S, int r);

/// Near/c-near neighbor statistics per point plus the aggregate pair counts
/// the load-bound formula consumes. For a point x in R, near_count is the
/// number of y in S with d(x, y) <= r and cnear_count the number with
/// d(x, y) <= c*r (inclusive of the near ones); level is the density level:
/// the smallest i in [1, kappa-1] with near_count > n * p2^i, else kappa,
/// where n = max(|R|, |S|).
struct DensityProfile {
    int kappa = 1;
    std::vector<std::int64_t> near_r, cnear_r;  // per R point
    std::vector<std::int64_t> near_s, cnear_s;  // per S point
    std::vector<int> level_r, level_s;
    std::int64_t out_r = 0;   // near pairs
    std::int64_t out_cr = 0;  // pairs with r < d <= c*r
    std::vector<std::int64_t> out_r_by_level;  // size kappa; entry i-1 = OUT_{r,i}
};

/// Computes the profile by brute force. Each near pair is attributed to
/// level min(level_x, level_y), so out_r_by_level partitions out_r; with
/// attribute_both it is instead counted at both endpoints' levels (twice
/// when they differ, once when equal), matching the looser reading.
DensityProfile density_profile(const std::vector<Point>& R, const std::vector<Point>& S,
                               const LshParams& params, int kappa,
                               bool attribute_both = false);

/// Predicted per-processor load for the adaptive join, constants 1:
/// sqrt(sum_i OUT_{r,i} / (p * p1^i)) + sqrt(OUT_cr / p) + n / p^(1/(1+rho)).
/// n is the nominal per-relation size. Reporting only.
double theoretical_load_bound(const DensityProfile& profile, const LshParams& params,
                              double n, int p);

/// |reported intersect exact| / |exact| over (r_id, s_id) identity; 1.0 when
/// exact is empty.
double recall(const std::vector<PairRecord>& reported, const std::vector<PairRecord>& exact);

}  // namespace simjoin
