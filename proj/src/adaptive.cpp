#include "simjoin/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "simjoin/rng.hpp"

namespace simjoin {

namespace {

auto tuple_sort_key(const KeyedTuple& t) {
    return std::tuple(t.key.level, t.key.repetition, t.key.hash.hi, t.key.hash.lo,
                      static_cast<int>(t.rel));
}

void validate_config(const JoinConfig& cfg) {
    if (cfg.p < 1) throw std::invalid_argument("join config: p must be >= 1");
    if (cfg.repetitions < 1) throw std::invalid_argument("join config: repetitions must be >= 1");
    if (cfg.c_rep < 1.0) throw std::invalid_argument("join config: c_rep must be >= 1");
    if (cfg.estimator == EstimatorMode::bucket_tree) {
        if (!(cfg.eps > 0.0 && cfg.eps <= 0.5))
            throw std::invalid_argument("join config: eps must be in (0, 1/2]");
        if (cfg.big_m < 1) throw std::invalid_argument("join config: M must be >= 1");
    }
}

int dataset_dim(const std::vector<Point>& R, const std::vector<Point>& S) {
    const Point* first = !R.empty() ? &R.front() : !S.empty() ? &S.front() : nullptr;
    if (first == nullptr) throw std::invalid_argument("both relations are empty");
    int dim = first->bits.dim();
    for (const auto& pt : R)
        if (pt.bits.dim() != dim)
            throw std::invalid_argument("relations must share one dimension");
    for (const auto& pt : S)
        if (pt.bits.dim() != dim)
            throw std::invalid_argument("relations must share one dimension");
    return dim;
}

/// Points in global order: R first, then S.
const Point& point_at(const std::vector<Point>& R, const std::vector<Point>& S, std::size_t g) {
    return g < R.size() ? R[g] : S[g - R.size()];
}

std::vector<std::size_t> block_starts(std::size_t n, int p) {
    std::vector<std::size_t> starts(p + 1, 0);
    for (int proc = 0; proc < p; ++proc)
        starts[proc + 1] = starts[proc] + mpc::Cluster<KeyedTuple>::block_size(n, p, proc);
    return starts;
}

/// Hash specs for one level: spec j's stream is derived from (tag, level, j).
std::vector<HashFunctionSpec> level_specs(const LshParams& params, int level, int count,
                                          std::uint64_t seed, std::uint64_t tag) {
    std::vector<HashFunctionSpec> specs;
    specs.reserve(count);
    for (int j = 0; j < count; ++j)
        specs.push_back({level, j,
                         derive_seed(seed, {tag, static_cast<std::uint64_t>(level),
                                            static_cast<std::uint64_t>(j)}),
                         params.dim});
    return specs;
}

/// Emits, at each point's processor, one tuple per (level in range_of(k_x),
/// spec at that level). active = (level == k_x). Returns tuples generated
/// per level (index = level).
std::vector<std::int64_t> emit_tuples(
    mpc::Cluster<KeyedTuple>& cluster, const std::vector<Point>& R,
    const std::vector<Point>& S, const std::vector<int>& level_of,
    const std::function<std::pair<int, int>(int)>& range_of,
    const std::map<int, std::vector<HashFunctionSpec>>& specs_by_level, int kappa) {
    const int p = cluster.processors();
    const std::size_t n_tot = R.size() + S.size();
    auto starts = block_starts(n_tot, p);
    std::vector<std::int64_t> generated(kappa + 1, 0);
    for (int proc = 0; proc < p; ++proc) {
        auto& local = cluster.local(proc);
        for (std::size_t g = starts[proc]; g < starts[proc + 1]; ++g) {
            const Point& pt = point_at(R, S, g);
            const int k = level_of[g];
            auto [lo, hi] = range_of(k);
            for (int i = lo; i <= hi; ++i) {
                for (const auto& spec : specs_by_level.at(i)) {
                    KeyedTuple t;
                    t.key = {i, spec.repetition, eval_hash(spec, pt.bits)};
                    t.id = pt.id;
                    t.rel = g < R.size() ? Relation::R : Relation::S;
                    t.active = (i == k);
                    t.origin = proc;
                    local.push_back(std::move(t));
                    ++generated[i];
                }
            }
        }
    }
    return generated;
}

/// Deletes every tuple whose key group holds no active tuple. Charges a
/// sort and a prefix sum (4 rounds); the deletions themselves are local.
/// Returns tuples removed per level (index = level).
std::vector<std::int64_t> prune_inactive_groups(mpc::Cluster<KeyedTuple>& cluster, int kappa) {
    const int p = cluster.processors();
    mpc_sort(cluster, tuple_sort_key);
    mpc_prefix_sum(
        cluster, [](const KeyedTuple& t) { return t.active ? 1 : 0; },
        [](KeyedTuple& t, std::int64_t v) { t.ann_a = v; });

    // Group scan over the sorted global order.
    std::vector<std::vector<std::size_t>> group_of(p);
    std::vector<std::int64_t> group_active;
    const TupleKey* prev_key = nullptr;
    for (int proc = 0; proc < p; ++proc) {
        const auto& items = cluster.local(proc);
        group_of[proc].resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& t = items[i];
            if (prev_key == nullptr || !(*prev_key == t.key)) group_active.push_back(0);
            if (t.active) ++group_active.back();
            group_of[proc][i] = group_active.size() - 1;
            prev_key = &items[i].key;
        }
    }

    std::vector<std::int64_t> pruned(kappa + 1, 0);
    for (int proc = 0; proc < p; ++proc) {
        auto& items = cluster.local(proc);
        std::vector<KeyedTuple> kept;
        kept.reserve(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (group_active[group_of[proc][i]] > 0)
                kept.push_back(std::move(items[i]));
            else
                ++pruned[items[i].key.level];
        }
        items = std::move(kept);
    }
    return pruned;
}

int argmin_level(const std::vector<double>& costs) {
    int best = 1;
    for (int i = 2; i <= static_cast<int>(costs.size()); ++i)
        if (costs[i - 1] < costs[best - 1]) best = i;
    return best;
}

}  // namespace

int phase_repetitions(const LshParams& params, double c_rep, int level) {
    if (level < 1) throw std::invalid_argument("phase_repetitions: level must be >= 1");
    double raw = c_rep * std::pow(params.p1, -level);
    int t = static_cast<int>(std::ceil(raw - 1e-9));
    return std::max(1, t);
}

LevelAssignment estimate_levels_exact(const std::vector<Point>& R,
                                      const std::vector<Point>& S,
                                      const LshParams& params, int kappa) {
    if (kappa < 1) throw std::invalid_argument("estimate_levels_exact: kappa must be >= 1");
    LevelAssignment a;
    a.mode = EstimatorMode::exact;
    a.kappa = kappa;

    auto assign_side = [&](const std::vector<Point>& X, const std::vector<Point>& Y,
                           std::vector<int>& levels, std::vector<std::vector<double>>& costs) {
        levels.resize(X.size());
        costs.resize(X.size());
        for (std::size_t xi = 0; xi < X.size(); ++xi) {
            std::vector<double> q(Y.size()), q_pow(Y.size());
            for (std::size_t yi = 0; yi < Y.size(); ++yi) {
                q[yi] = 1.0 - static_cast<double>(BitVec::hamming(X[xi].bits, Y[yi].bits)) /
                                  params.dim;
                q_pow[yi] = 1.0;
            }
            std::vector<double> w(kappa);
            double scale = 1.0;
            for (int i = 1; i <= kappa; ++i) {
                scale /= params.p1;
                double sum = 0.0;
                for (std::size_t yi = 0; yi < Y.size(); ++yi) {
                    q_pow[yi] *= q[yi];
                    sum += q_pow[yi];
                }
                w[i - 1] = scale * (1.0 + sum);
            }
            levels[xi] = argmin_level(w);
            costs[xi] = std::move(w);
        }
    };
    assign_side(R, S, a.level_r, a.costs_r);
    assign_side(S, R, a.level_s, a.costs_s);
    return a;
}

LevelAssignment estimate_levels_sampled(mpc::Cluster<KeyedTuple>& cluster,
                                        const std::vector<Point>& R,
                                        const std::vector<Point>& S,
                                        const LshParams& params, int kappa,
                                        std::uint64_t seed, double c_rep) {
    if (kappa < 1) throw std::invalid_argument("estimate_levels_sampled: kappa must be >= 1");
    if (cluster.total_items() != 0)
        throw std::invalid_argument("estimate_levels_sampled: cluster must start empty");
    const int p = cluster.processors();
    const std::size_t n_tot = R.size() + S.size();

    LevelAssignment a;
    a.mode = EstimatorMode::sampled;
    a.kappa = kappa;
    a.level_r.assign(R.size(), 1);
    a.level_s.assign(S.size(), 1);
    a.costs_r.resize(R.size());
    a.costs_s.resize(S.size());
    if (n_tot == 0) return a;

    std::map<int, std::vector<HashFunctionSpec>> specs;
    std::int64_t total_specs = 0;
    std::vector<int> t(kappa + 1, 0);
    for (int i = 1; i <= kappa; ++i) {
        t[i] = phase_repetitions(params, c_rep, i);
        specs[i] = level_specs(params, i, t[i], seed, seed_tag::estimator_spec);
        total_specs += t[i];
    }

    mpc::broadcast(cluster, total_specs);

    // Local emission; ann_b remembers the point's slot in its processor's
    // block so the annotated sizes can come home.
    auto starts = block_starts(n_tot, p);
    std::vector<int> all_levels(n_tot, kappa);
    emit_tuples(
        cluster, R, S, all_levels, [&](int) { return std::pair(1, kappa); }, specs, kappa);
    // Emission wrote each point's tuples consecutively; tag them with the
    // point's slot in its processor's block.
    for (int proc = 0; proc < p; ++proc) {
        auto& local = cluster.local(proc);
        std::size_t pos = 0;
        for (std::size_t g = starts[proc]; g < starts[proc + 1]; ++g)
            for (std::int64_t e = 0; e < total_specs; ++e)
                local[pos++].ann_b = static_cast<std::int64_t>(g - starts[proc]);
    }

    mpc_sort(cluster, tuple_sort_key);
    mpc_prefix_sum(
        cluster, [](const KeyedTuple&) { return 1; },
        [](KeyedTuple& tup, std::int64_t v) { tup.ann_a = v; });

    // The prefix positions plus locally visible group boundaries yield each
    // group's size; write it onto every member.
    {
        std::vector<KeyedTuple*> flat;
        for (int proc = 0; proc < p; ++proc)
            for (auto& tup : cluster.local(proc)) flat.push_back(&tup);
        std::size_t start = 0;
        while (start < flat.size()) {
            std::size_t end = start + 1;
            while (end < flat.size() && flat[end]->key == flat[start]->key) ++end;
            for (std::size_t i = start; i < end; ++i)
                flat[i]->ann_a = static_cast<std::int64_t>(end - start);
            start = end;
        }
    }

    cluster.run_round([](int, std::vector<KeyedTuple>& items, auto& em) {
        for (auto& tup : items) {
            int dest = tup.origin;
            em.send(dest, std::move(tup));
        }
        items.clear();
    });

    // Local readout: S_{x,i} = sum of the annotated bucket sizes of x's
    // level-i tuples.
    for (int proc = 0; proc < p; ++proc) {
        const std::size_t block = starts[proc + 1] - starts[proc];
        std::vector<std::vector<double>> acc(block, std::vector<double>(kappa + 1, 0.0));
        for (const auto& tup : cluster.local(proc))
            acc[tup.ann_b][tup.key.level] += static_cast<double>(tup.ann_a);
        for (std::size_t slot = 0; slot < block; ++slot) {
            std::vector<double> w(kappa);
            for (int i = 1; i <= kappa; ++i) {
                double p1i = std::pow(params.p1, i);
                w[i - 1] = acc[slot][i] / (t[i] * p1i) + 1.0 / p1i;
            }
            std::size_t g = starts[proc] + slot;
            int level = argmin_level(w);
            if (g < R.size()) {
                a.level_r[g] = level;
                a.costs_r[g] = std::move(w);
            } else {
                a.level_s[g - R.size()] = level;
                a.costs_s[g - R.size()] = std::move(w);
            }
        }
    }
    cluster.clear_items();
    return a;
}

LevelAssignment select_level_bucket_tree(const std::vector<Point>& R,
                                         const std::vector<Point>& S,
                                         const LshParams& params, int kappa,
                                         double eps, int big_m, std::uint64_t seed,
                                         LevelRule rule, bool drop_m_term) {
    if (kappa < 1) throw std::invalid_argument("select_level_bucket_tree: kappa must be >= 1");
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::invalid_argument("select_level_bucket_tree: eps must be in (0, 1/2]");
    if (big_m < 1) throw std::invalid_argument("select_level_bucket_tree: M must be >= 1");

    LevelAssignment a;
    a.mode = EstimatorMode::bucket_tree;
    a.kappa = kappa;
    const std::size_t n_tot = R.size() + S.size();
    a.level_r.assign(R.size(), 1);
    a.level_s.assign(S.size(), 1);
    a.costs_r.resize(R.size());
    a.costs_s.resize(S.size());
    if (n_tot == 0) return a;

    int depth = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(n_tot)))));
    depth = std::min(depth, 64);
    HashFunctionSpec spec{depth, 0, derive_seed(seed, {seed_tag::bucket_tree}), params.dim};

    std::vector<std::uint64_t> code(n_tot);
    for (std::size_t g = 0; g < n_tot; ++g)
        code[g] = eval_hash(spec, point_at(R, S, g).bits).lo;

    // B_k per point: size of its depth-k prefix class over R union S.
    std::vector<std::vector<std::int64_t>> bucket_size(n_tot,
                                                       std::vector<std::int64_t>(depth + 1, 0));
    for (int k = 1; k <= depth; ++k) {
        std::uint64_t mask = k == 64 ? ~0ULL : ((1ULL << k) - 1);
        std::unordered_map<std::uint64_t, std::int64_t> count;
        for (std::size_t g = 0; g < n_tot; ++g) ++count[code[g] & mask];
        for (std::size_t g = 0; g < n_tot; ++g) bucket_size[g][k] = count[code[g] & mask];
    }

    for (std::size_t g = 0; g < n_tot; ++g) {
        std::vector<double> cost(depth);
        double best = 0.0;
        for (int k = 1; k <= depth; ++k) {
            double numer = static_cast<double>(bucket_size[g][k]) + (drop_m_term ? 0.0 : big_m);
            cost[k - 1] = numer / std::pow(params.p1, k);
            if (k == 1 || cost[k - 1] < best) best = cost[k - 1];
        }
        const double threshold = (1.0 + eps) * best;
        int min_k = 0, max_k = 0;
        for (int k = 1; k <= depth; ++k) {
            if (cost[k - 1] <= threshold) {
                if (min_k == 0) min_k = k;
                max_k = k;
            }
        }
        int level = rule == LevelRule::max_k ? max_k : 1 + min_k;
        level = std::clamp(level, 1, kappa);
        if (g < R.size()) {
            a.level_r[g] = level;
            a.costs_r[g] = std::move(cost);
        } else {
            a.level_s[g - R.size()] = level;
            a.costs_s[g - R.size()] = std::move(cost);
        }
    }
    return a;
}

PointStatus point_status(const LevelAssignment& assignment, Relation rel, std::size_t index,
                         int phase) {
    if (phase < 1) throw std::invalid_argument("point_status: phase must be >= 1");
    int k = rel == Relation::R ? assignment.level_r.at(index) : assignment.level_s.at(index);
    if (phase == k) return PointStatus::active;
    if (phase < k) return PointStatus::passive;
    return PointStatus::dead;
}

std::vector<KeyedTuple> run_phase(mpc::Cluster<KeyedTuple>& cluster, int phase,
                                  const LevelAssignment& assignment,
                                  const std::vector<Point>& R,
                                  const std::vector<Point>& S, const JoinConfig& config) {
    if (phase < 1 || phase > assignment.kappa)
        throw std::invalid_argument("run_phase: phase out of range");
    if (cluster.total_items() != 0)
        throw std::invalid_argument("run_phase: cluster must start empty");
    const int dim = dataset_dim(R, S);
    auto params = bit_sampling_family(dim, config.r, config.c);
    const int t_i = phase_repetitions(params, config.c_rep, phase);

    std::uint64_t rep_seed = derive_seed(config.seed, {seed_tag::repetition, 0});
    std::map<int, std::vector<HashFunctionSpec>> specs;
    specs[phase] = level_specs(params, phase, t_i, rep_seed, seed_tag::phase_spec);

    mpc::broadcast(cluster, t_i);

    std::vector<int> level_of(R.size() + S.size());
    for (std::size_t g = 0; g < level_of.size(); ++g)
        level_of[g] = g < R.size() ? assignment.level_r[g]
                                   : assignment.level_s[g - R.size()];
    emit_tuples(
        cluster, R, S, level_of,
        [&](int k) { return k >= phase ? std::pair(phase, phase) : std::pair(1, 0); }, specs,
        assignment.kappa);
    prune_inactive_groups(cluster, assignment.kappa);

    std::vector<KeyedTuple> survivors;
    for (int proc = 0; proc < cluster.processors(); ++proc)
        for (const auto& t : cluster.local(proc)) survivors.push_back(t);
    return survivors;
}

namespace {

/// Shared shell of similarity_join and static_baseline_join.
JoinResult run_pipeline(mpc::Cluster<KeyedTuple>& cluster, const std::vector<Point>& R,
                        const std::vector<Point>& S, const JoinConfig& config, bool baseline) {
    validate_config(config);
    if (cluster.processors() != config.p)
        throw std::invalid_argument("similarity join: cluster size differs from config.p");
    if (cluster.total_items() != 0)
        throw std::invalid_argument("similarity join: cluster must start empty");

    JoinResult res;
    res.repetitions = config.repetitions;
    const std::size_t n_tot = R.size() + S.size();
    if (n_tot == 0) return res;

    const int dim = dataset_dim(R, S);
    res.params = bit_sampling_family(dim, config.r, config.c);
    const LshParams& params = res.params;
    const int kap = kappa(params, config.p);
    res.kappa = kap;
    if (static_cast<std::size_t>(config.p) > n_tot)
        throw std::invalid_argument("similarity join: p must be <= total point count");
    if (static_cast<double>(config.p) > std::sqrt(static_cast<double>(n_tot)))
        std::cerr << "warning: p = " << config.p << " exceeds sqrt(n) = "
                  << std::sqrt(static_cast<double>(n_tot))
                  << "; per-processor load guarantees degrade\n";

    const int phase_lo = baseline ? kap : 1;
    for (int i = phase_lo; i <= kap; ++i) {
        PhaseStats st;
        st.level = i;
        st.replications = phase_repetitions(params, config.c_rep, i);
        res.per_phase.push_back(st);
    }
    auto phase_stats = [&](int level) -> PhaseStats& {
        return res.per_phase[level - phase_lo];
    };

    std::unordered_map<std::int64_t, const Point*> r_by_id, s_by_id;
    for (const auto& pt : R) r_by_id[pt.id] = &pt;
    for (const auto& pt : S) s_by_id[pt.id] = &pt;

    std::map<std::pair<std::int64_t, std::int64_t>, int> found;
    std::int64_t near_emissions = 0;
    PairSink sink = [&](const KeyedTuple& a, const KeyedTuple& b) {
        if (!a.active && !b.active) return;  // candidate needs an active endpoint
        const Point* x = r_by_id.at(a.id);
        const Point* y = s_by_id.at(b.id);
        int d = BitVec::hamming(x->bits, y->bits);
        if (d <= config.r) {
            ++near_emissions;
            found.emplace(std::make_pair(a.id, b.id), d);
        }
    };

    LevelAssignment exact_assignment;  // rep-independent, computed on demand
    bool exact_ready = false;

    for (int rep = 0; rep < config.repetitions; ++rep) {
        std::uint64_t rep_seed =
            derive_seed(config.seed, {seed_tag::repetition, static_cast<std::uint64_t>(rep)});

        std::vector<int> level_of(n_tot, kap);
        if (!baseline) {
            LevelAssignment assign;
            switch (config.estimator) {
                case EstimatorMode::exact:
                    if (!exact_ready) {
                        exact_assignment = estimate_levels_exact(R, S, params, kap);
                        exact_ready = true;
                    }
                    assign = exact_assignment;
                    break;
                case EstimatorMode::sampled:
                    assign = estimate_levels_sampled(
                        cluster, R, S, params, kap,
                        derive_seed(rep_seed, {seed_tag::estimator_spec}), config.c_rep);
                    break;
                case EstimatorMode::bucket_tree:
                    assign = select_level_bucket_tree(
                        R, S, params, kap, config.eps, config.big_m,
                        derive_seed(rep_seed, {seed_tag::bucket_tree}), config.level_rule,
                        config.drop_m_term);
                    break;
            }
            for (std::size_t g = 0; g < n_tot; ++g)
                level_of[g] = g < R.size() ? assign.level_r[g]
                                           : assign.level_s[g - R.size()];
        }
        for (std::size_t g = 0; g < n_tot; ++g) ++phase_stats(level_of[g]).active_points;

        std::map<int, std::vector<HashFunctionSpec>> specs;
        std::int64_t total_specs = 0;
        for (int i = phase_lo; i <= kap; ++i) {
            int t_i = phase_repetitions(params, config.c_rep, i);
            specs[i] = level_specs(params, i, t_i, rep_seed, seed_tag::phase_spec);
            total_specs += t_i;
        }
        mpc::broadcast(cluster, total_specs);

        auto generated = emit_tuples(
            cluster, R, S, level_of,
            [&](int k) { return baseline ? std::pair(kap, kap) : std::pair(1, k); }, specs,
            kap);
        for (int i = phase_lo; i <= kap; ++i)
            phase_stats(i).tuples_generated += generated[i];

        if (!baseline) {
            auto pruned = prune_inactive_groups(cluster, kap);
            for (int i = phase_lo; i <= kap; ++i) phase_stats(i).tuples_pruned += pruned[i];
        }

        equi_join(cluster, sink);
        cluster.clear_items();
    }

    res.load = mpc::load_summary(cluster);
    res.rounds = res.load.rounds();
    res.max_load = res.load.max_load();
    res.duplicates_emitted = near_emissions;
    res.pairs.reserve(found.size());
    for (const auto& [ids, d] : found) res.pairs.push_back({ids.first, ids.second, d});
    return res;
}

}  // namespace

JoinResult similarity_join(mpc::Cluster<KeyedTuple>& cluster, const std::vector<Point>& R,
                           const std::vector<Point>& S, const JoinConfig& config) {
    return run_pipeline(cluster, R, S, config, false);
}

JoinResult static_baseline_join(mpc::Cluster<KeyedTuple>& cluster, const std::vector<Point>& R,
                                const std::vector<Point>& S, const JoinConfig& config) {
    return run_pipeline(cluster, R, S, config, true);
}

}  // namespace simjoin
