#include "simjoin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace simjoin {

std::vector<PairRecord> brute_force_join(const std::vector<Point>& R,
                                         const std::vector<Point>& S, int r) {
    if (r < 0) throw std::invalid_argument("brute_force_join: r must be >= 0");
    if (static_cast<double>(R.size()) * static_cast<double>(S.size()) > 1e8)
        throw std::length_error("brute_force_join: |R|*|S| exceeds the 1e8 size guard");
    std::vector<PairRecord> out;
    for (const auto& x : R)
        for (const auto& y : S) {
            int d = BitVec::hamming(x.bits, y.bits);
            if (d <= r) out.push_back({x.id, y.id, d});
        }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

int density_level(std::int64_t near_count, double n, double p2, int kappa) {
    for (int i = 1; i < kappa; ++i)
        if (static_cast<double>(near_count) > n * std::pow(p2, i)) return i;
    return kappa;
}

}  // namespace

DensityProfile density_profile(const std::vector<Point>& R, const std::vector<Point>& S,
                               const LshParams& params, int kappa, bool attribute_both) {
    if (kappa < 1) throw std::invalid_argument("density_profile: kappa must be >= 1");
    if (static_cast<double>(R.size()) * static_cast<double>(S.size()) > 1e8)
        throw std::length_error("density_profile: |R|*|S| exceeds the 1e8 size guard");

    DensityProfile prof;
    prof.kappa = kappa;
    prof.near_r.assign(R.size(), 0);
    prof.cnear_r.assign(R.size(), 0);
    prof.near_s.assign(S.size(), 0);
    prof.cnear_s.assign(S.size(), 0);
    prof.out_r_by_level.assign(kappa, 0);

    const double cr = params.c * params.r;
    for (std::size_t i = 0; i < R.size(); ++i)
        for (std::size_t j = 0; j < S.size(); ++j) {
            int d = BitVec::hamming(R[i].bits, S[j].bits);
            if (d <= params.r) {
                ++prof.near_r[i];
                ++prof.near_s[j];
            }
            if (static_cast<double>(d) <= cr) {
                ++prof.cnear_r[i];
                ++prof.cnear_s[j];
                if (d > params.r) ++prof.out_cr;
            }
        }

    const double n = static_cast<double>(std::max(R.size(), S.size()));
    prof.level_r.resize(R.size());
    prof.level_s.resize(S.size());
    for (std::size_t i = 0; i < R.size(); ++i) {
        prof.level_r[i] = density_level(prof.near_r[i], n, params.p2, kappa);
        prof.out_r += prof.near_r[i];
    }
    for (std::size_t j = 0; j < S.size(); ++j)
        prof.level_s[j] = density_level(prof.near_s[j], n, params.p2, kappa);

    for (std::size_t i = 0; i < R.size(); ++i)
        for (std::size_t j = 0; j < S.size(); ++j) {
            if (BitVec::hamming(R[i].bits, S[j].bits) > params.r) continue;
            int lx = prof.level_r[i], ly = prof.level_s[j];
            if (attribute_both) {
                ++prof.out_r_by_level[lx - 1];
                if (ly != lx) ++prof.out_r_by_level[ly - 1];
            } else {
                ++prof.out_r_by_level[std::min(lx, ly) - 1];
            }
        }
    return prof;
}

double theoretical_load_bound(const DensityProfile& profile, const LshParams& params,
                              double n, int p) {
    if (p < 1) throw std::invalid_argument("theoretical_load_bound: p must be >= 1");
    double dense_sum = 0.0;
    for (int i = 1; i <= profile.kappa; ++i)
        dense_sum += static_cast<double>(profile.out_r_by_level[i - 1]) /
                     (p * std::pow(params.p1, i));
    return std::sqrt(dense_sum) + std::sqrt(static_cast<double>(profile.out_cr) / p) +
           n / std::pow(static_cast<double>(p), 1.0 / (1.0 + params.rho));
}

double recall(const std::vector<PairRecord>& reported, const std::vector<PairRecord>& exact) {
    if (exact.empty()) return 1.0;
    std::set<std::pair<std::int64_t, std::int64_t>> truth;
    for (const auto& e : exact) truth.insert({e.r_id, e.s_id});
    std::set<std::pair<std::int64_t, std::int64_t>> hit;
    for (const auto& q : reported) {
        auto key = std::make_pair(q.r_id, q.s_id);
        if (truth.count(key)) hit.insert(key);
    }
    return static_cast<double>(hit.size()) / static_cast<double>(truth.size());
}

}  // namespace simjoin
