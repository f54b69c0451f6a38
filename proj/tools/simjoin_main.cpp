#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "simjoin/adaptive.hpp"
#include "simjoin/datagen.hpp"
#include "simjoin/json_io.hpp"
#include "simjoin/oracle.hpp"

namespace {

constexpr const char* kVersion = "simjoin 0.1.0";

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

/// SIMJOIN_SEED in the environment beats the --seed flag.
std::uint64_t effective_seed(std::uint64_t flag_seed) {
    const char* env = std::getenv("SIMJOIN_SEED");
    if (env == nullptr || *env == '\0') return flag_seed;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("SIMJOIN_SEED is not a number: ") + env);
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string pairs_csv(const std::vector<simjoin::PairRecord>& pairs) {
    std::ostringstream os;
    for (const auto& pr : pairs)
        os << pr.r_id << "," << pr.s_id << "," << pr.distance << "\n";
    return os.str();
}

struct GenArgs {
    std::string mode = "uniform";
    int n = 0;
    int dim = 1;
    int clusters = 0;
    int cluster_size = 0;
    int radius = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    simjoin::DatasetSpec spec;
    spec.mode = args.mode == "clusters" ? simjoin::GenMode::planted_clusters
                                        : simjoin::GenMode::uniform;
    spec.n = args.n;
    spec.dim = args.dim;
    spec.clusters = args.clusters;
    spec.cluster_size = args.cluster_size;
    spec.radius = args.radius;
    spec.seed = effective_seed(args.seed);
    simjoin::Dataset data = spec.mode == simjoin::GenMode::planted_clusters
                                ? simjoin::gen_planted_clusters(spec)
                                : simjoin::gen_uniform(spec);
    simjoin::write_dataset(args.out, data);
    std::cout << "wrote " << args.out << ": " << data.total_points() << " points, d="
              << data.dim << "\n";
    return 0;
}

struct JoinArgs {
    std::string in;
    int r = 1;
    double c = 2.0;
    int p = 1;
    int reps = 0;  // 0 = ceil(2 ln n)
    std::string estimator = "sampled";
    std::uint64_t seed = 0;
    std::string metrics;
    std::string pairs;
    bool baseline = false;
    double c_rep = 1.0;
    double eps = 0.25;
    int big_m = 8;
    std::string level_rule = "max";
    bool drop_m_term = false;
    bool no_oracle = false;
};

int cmd_join(const JoinArgs& args) {
    simjoin::Dataset data = simjoin::read_dataset(args.in);
    const std::size_t n_rel = std::max(data.r.size(), data.s.size());

    simjoin::JoinConfig cfg;
    cfg.r = args.r;
    cfg.c = args.c;
    cfg.p = args.p;
    cfg.repetitions = args.reps > 0
                          ? args.reps
                          : std::max(1, static_cast<int>(std::ceil(
                                            2.0 * std::log(std::max<std::size_t>(n_rel, 2)))));
    if (args.estimator == "exact")
        cfg.estimator = simjoin::EstimatorMode::exact;
    else if (args.estimator == "bucket")
        cfg.estimator = simjoin::EstimatorMode::bucket_tree;
    else
        cfg.estimator = simjoin::EstimatorMode::sampled;
    cfg.seed = effective_seed(args.seed);
    cfg.c_rep = args.c_rep;
    cfg.eps = args.eps;
    cfg.big_m = args.big_m;
    cfg.level_rule = args.level_rule == "one-plus-min" ? simjoin::LevelRule::one_plus_min
                                                       : simjoin::LevelRule::max_k;
    cfg.drop_m_term = args.drop_m_term;

    if (!data.r.empty() || !data.s.empty()) {
        // surface the parameter check before any heavy work
        (void)simjoin::bit_sampling_family(data.dim, cfg.r, cfg.c);
    }

    simjoin::mpc::Cluster<simjoin::KeyedTuple> cluster(cfg.p);
    simjoin::JoinResult result = args.baseline
                                     ? simjoin::static_baseline_join(cluster, data.r, data.s, cfg)
                                     : simjoin::similarity_join(cluster, data.r, data.s, cfg);

    nlohmann::json metrics;
    metrics["manifest"] = {
        {"version", kVersion},
        {"timestamp", iso_timestamp()},
        {"dataset", args.in},
        {"dataset_hash", hex64(simjoin::file_hash(args.in))},
        {"config",
         {{"r", cfg.r},
          {"c", cfg.c},
          {"p", cfg.p},
          {"repetitions", cfg.repetitions},
          {"estimator", args.baseline ? "baseline" : args.estimator},
          {"c_rep", cfg.c_rep},
          {"seed", cfg.seed},
          {"eps", cfg.eps},
          {"big_m", cfg.big_m},
          {"level_rule", args.level_rule},
          {"drop_m_term", cfg.drop_m_term},
          {"baseline", args.baseline}}}};
    metrics["L"] = result.max_load;
    metrics["rounds"] = result.rounds;
    metrics["duplicates_emitted"] = result.duplicates_emitted;
    metrics["pairs_found"] = result.pairs.size();
    metrics["per_phase"] = simjoin::per_phase_json(result.per_phase);
    metrics["load"] = simjoin::load_report_json(result.load);

    const double cross = static_cast<double>(data.r.size()) * static_cast<double>(data.s.size());
    bool oracle_ok = !args.no_oracle && cross > 0 && cross <= 1e8;
    if (oracle_ok) {
        auto exact = simjoin::brute_force_join(data.r, data.s, cfg.r);
        auto profile =
            simjoin::density_profile(data.r, data.s, result.params, result.kappa);
        metrics["recall"] = simjoin::recall(result.pairs, exact);
        metrics["theoretical_bound"] = simjoin::theoretical_load_bound(
            profile, result.params, static_cast<double>(n_rel), cfg.p);
    } else {
        metrics["recall"] = nullptr;
        metrics["theoretical_bound"] = nullptr;
    }

    if (!args.metrics.empty()) write_text(args.metrics, metrics.dump(2) + "\n");
    if (!args.pairs.empty()) write_text(args.pairs, pairs_csv(result.pairs));

    std::cout << "pairs=" << result.pairs.size() << " L=" << result.max_load
              << " rounds=" << result.rounds;
    if (oracle_ok) std::cout << " recall=" << metrics["recall"].get<double>();
    std::cout << "\n";
    return 0;
}

struct OracleArgs {
    std::string in;
    int r = 1;
    double c = 2.0;
    int p = 16;
    std::string pairs;
    std::string profile;
};

int cmd_oracle(const OracleArgs& args) {
    simjoin::Dataset data = simjoin::read_dataset(args.in);
    auto exact = simjoin::brute_force_join(data.r, data.s, args.r);
    if (!args.pairs.empty()) write_text(args.pairs, pairs_csv(exact));
    if (!args.profile.empty()) {
        auto params = simjoin::bit_sampling_family(data.dim, args.r, args.c);
        int kap = simjoin::kappa(params, args.p);
        auto profile = simjoin::density_profile(data.r, data.s, params, kap);
        write_text(args.profile, simjoin::density_profile_json(profile).dump(2) + "\n");
    }
    std::cout << "exact_pairs=" << exact.size() << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& files) {
    std::cout << "file,L,rounds,bound,load_over_bound,recall,pairs,duplicates\n";
    int valid = 0;
    for (const auto& path : files) {
        nlohmann::json m;
        try {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open");
            in >> m;
            std::ostringstream row;
            row << path << "," << m.at("L").get<std::int64_t>() << ","
                << m.at("rounds").get<int>() << ",";
            if (m.contains("theoretical_bound") && !m["theoretical_bound"].is_null()) {
                double bound = m["theoretical_bound"].get<double>();
                row << bound << ",";
                if (bound > 0)
                    row << m.at("L").get<double>() / bound;
                row << ",";
            } else {
                row << ",,";
            }
            if (m.contains("recall") && !m["recall"].is_null())
                row << m["recall"].get<double>();
            row << "," << m.at("pairs_found").get<std::int64_t>() << ","
                << m.at("duplicates_emitted").get<std::int64_t>();
            std::cout << row.str() << "\n";
            ++valid;
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << path << ": " << e.what() << "\n";
        }
    }
    return valid > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"density-adaptive LSH similarity join on a simulated "
                 "round-synchronous cluster"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
    gen_cmd->add_option("--mode", gen.mode, "uniform or clusters")
        ->check(CLI::IsMember({"uniform", "clusters"}));
    gen_cmd->add_option("--n", gen.n, "points per relation")->required();
    gen_cmd->add_option("--dim", gen.dim, "bit dimension")->required();
    gen_cmd->add_option("--clusters", gen.clusters, "planted cluster count");
    gen_cmd->add_option("--cluster-size", gen.cluster_size, "points per cluster");
    gen_cmd->add_option("--radius", gen.radius, "max flips from cluster center");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--out", gen.out, "output dataset path")->required();

    JoinArgs join;
    auto* join_cmd = app.add_subcommand("join", "run the similarity join");
    join_cmd->add_option("--in", join.in, "dataset path")->required();
    join_cmd->add_option("--r", join.r, "distance threshold")->required();
    join_cmd->add_option("--c", join.c, "approximation factor")->required();
    join_cmd->add_option("--p", join.p, "processor count")->required();
    join_cmd->add_option("--reps", join.reps, "repetitions (default ceil(2 ln n))");
    join_cmd->add_option("--estimator", join.estimator, "exact, sampled or bucket")
        ->check(CLI::IsMember({"exact", "sampled", "bucket"}));
    join_cmd->add_option("--seed", join.seed, "master seed");
    join_cmd->add_option("--metrics", join.metrics, "metrics JSON output path");
    join_cmd->add_option("--pairs", join.pairs, "pairs CSV output path");
    join_cmd->add_flag("--baseline", join.baseline, "run the static single-level join");
    join_cmd->add_option("--c-rep", join.c_rep, "hash draw multiplier (t_i = ceil(c_rep/p1^i))");
    join_cmd->add_option("--eps", join.eps, "bucket-tree tolerance");
    join_cmd->add_option("--big-m", join.big_m, "bucket-tree additive term M");
    join_cmd->add_option("--level-rule", join.level_rule, "bucket-tree rule: max or one-plus-min")
        ->check(CLI::IsMember({"max", "one-plus-min"}));
    join_cmd->add_flag("--drop-m-term", join.drop_m_term, "drop the +M term in bucket-tree costs");
    join_cmd->add_flag("--no-oracle", join.no_oracle,
                       "skip brute-force recall and bound computation");

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "exact join and density profile");
    oracle_cmd->add_option("--in", oracle.in, "dataset path")->required();
    oracle_cmd->add_option("--r", oracle.r, "distance threshold")->required();
    oracle_cmd->add_option("--c", oracle.c, "approximation factor (for the profile)");
    oracle_cmd->add_option("--p", oracle.p, "processor count (for the profile's kappa)");
    oracle_cmd->add_option("--pairs", oracle.pairs, "exact pairs CSV output path");
    oracle_cmd->add_option("--profile", oracle.profile, "density profile JSON output path");

    std::vector<std::string> report_files;
    auto* report_cmd = app.add_subcommand("report", "summarize metrics files as CSV");
    report_cmd->add_option("files", report_files, "metrics JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (join_cmd->parsed()) return cmd_join(join);
        if (oracle_cmd->parsed()) return cmd_oracle(oracle);
        if (report_cmd->parsed()) return cmd_report(report_files);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
