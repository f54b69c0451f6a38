#pragma once

#include <cstdint>
#include <vector>

#include "simjoin/bitvec.hpp"
#include "simjoin/equijoin.hpp"
#include "simjoin/lsh.hpp"
#include "simjoin/mpc.hpp"
#include "simjoin/oracle.hpp"

namespace simjoin {

enum class EstimatorMode { exact, sampled, bucket_tree };

/// Which member of the candidate level set the bucket-tree estimator picks:
/// the highest admissible level, or one past the lowest (both readings are
/// in circulation; max_k is the default).
enum class LevelRule { max_k, one_plus_min };

/// All knobs of one similarity-join run.
struct JoinConfig {
    int r = 1;
    double c = 2.0;
    int p = 1;
    int repetitions = 1;
    EstimatorMode estimator = EstimatorMode::sampled;
    double c_rep = 1.0;  // t_i = ceil(c_rep / p1^i) hash draws at level i
    std::uint64_t seed = 0;
    // bucket-tree mode only
    double eps = 0.25;
    int big_m = 8;
    LevelRule level_rule = LevelRule::max_k;
    bool drop_m_term = false;
};

/// Per-point level choices: level_r[i] / level_s[i] = k_x
/// of the i-th point of R / S, each in [1, kappa]. costs_* hold the
/// estimated per-level comparison costs the argmin ran over (kappa entries
/// for the exact and sampled modes, tree-depth entries for bucket_tree).
struct LevelAssignment {
    EstimatorMode mode = EstimatorMode::exact;
    int kappa = 1;
    std::vector<int> level_r, level_s;
    std::vector<std::vector<double>> costs_r, costs_s;
};

enum class PointStatus { active, passive, dead };

struct PhaseStats {
    int level = 0;
    int replications = 0;  // t_i, per repetition
    std::int64_t active_points = 0;
    std::int64_t tuples_generated = 0;
    std::int64_t tuples_pruned = 0;
};

struct JoinResult {
    std::vector<PairRecord> pairs;       // deduplicated, sorted by (r_id, s_id)
    std::int64_t duplicates_emitted = 0; // near-pair materializations before dedup
    mpc::LoadReport load;
    std::vector<PhaseStats> per_phase;   // one entry per level, summed over repetitions
    int rounds = 0;
    std::int64_t max_load = 0;
    LshParams params{};
    int kappa = 1;
    int repetitions = 0;
};

/// Hash draws per level: t_i = ceil(c_rep / p1^i), never below 1.
int phase_repetitions(const LshParams& params, double c_rep, int level);

/// Level choice from exact expected bucket work: for x in R,
/// W(x, i) = p1^-i * (1 + sum over y in S of (1 - d(x,y)/d)^i), minimized
/// over i in [1, kappa] with ties to the smallest level; symmetric for S.
/// Single-machine reference; performs no accounted communication.
LevelAssignment estimate_levels_exact(const std::vector<Point>& R,
                                      const std::vector<Point>& S,
                                      const LshParams& params, int kappa);

/// Distributed bucket-size sampling: every point hashes into t_i buckets
/// per level, a sort plus prefix sums annotate each tuple with its bucket
/// size, and the annotated sizes return to their points. The level cost is
/// W~(x, i) = S_{x,i} / (t_i * p1^i) + p1^-i where S_{x,i} totals the
/// sampled bucket sizes. Runs in 6 accounted rounds; clears the cluster's
/// items before returning.
LevelAssignment estimate_levels_sampled(mpc::Cluster<KeyedTuple>& cluster,
                                        const std::vector<Point>& R,
                                        const std::vector<Point>& S,
                                        const LshParams& params, int kappa,
                                        std::uint64_t seed, double c_rep = 1.0);

/// Level choice from one concatenated hash tree of depth ceil(log2 n):
/// B_k(x) = size of x's depth-k prefix bucket, cost_k = (B_k + M) / p1^k
/// (M dropped on request), W^(x) = min_k cost_k, and the candidate set
/// K(x) = {k : cost_k <= (1+eps) * W^(x)} resolved by the level rule, then
/// clamped into [1, kappa]. Single-machine; no accounted communication.
LevelAssignment select_level_bucket_tree(const std::vector<Point>& R,
                                         const std::vector<Point>& S,
                                         const LshParams& params, int kappa,
                                         double eps, int big_m, std::uint64_t seed,
                                         LevelRule rule = LevelRule::max_k,
                                         bool drop_m_term = false);

/// A point's role in phase i: active when i == k_x, passive below, dead
/// above (dead points emit nothing).
PointStatus point_status(const LevelAssignment& assignment, Relation rel,
                         std::size_t index, int phase);

/// Runs one phase in isolation: broadcasts the t_i level-i hash specs,
/// makes every non-dead point emit its level-i tuples, and deletes all
/// tuples whose key group holds no active point (sort + prefix sum).
/// Returns the surviving tuples in global order; the cluster keeps them so
/// a join step can follow. 5 accounted rounds.
std::vector<KeyedTuple> run_phase(mpc::Cluster<KeyedTuple>& cluster, int phase,
                                  const LevelAssignment& assignment,
                                  const std::vector<Point>& R,
                                  const std::vector<Point>& S,
                                  const JoinConfig& config);

/// The full pipeline: estimate levels, emit all phases' tuples into shared
/// rounds, prune, equi-join once over every survivor, keep candidate pairs
/// with an active endpoint whose exact Hamming distance is <= r, and union
/// the results of `repetitions` independently seeded repetitions.
/// The cluster must be empty and sized to config.p.
JoinResult similarity_join(mpc::Cluster<KeyedTuple>& cluster,
                           const std::vector<Point>& R,
                           const std::vector<Point>& S, const JoinConfig& config);

/// The single-level comparison algorithm: every point is active at level
/// kappa, no estimation and no pruning; otherwise the identical pipeline
/// (same hash spec seeds, same equi-join, same filters).
JoinResult static_baseline_join(mpc::Cluster<KeyedTuple>& cluster,
                                const std::vector<Point>& R,
                                const std::vector<Point>& S, const JoinConfig& config);

}  // namespace simjoin
