#pragma once

#include <vector>

#include "json.hpp"
#include "simjoin/adaptive.hpp"
#include "simjoin/mpc.hpp"
#include "simjoin/oracle.hpp"

namespace simjoin {

inline nlohmann::json load_report_json(const mpc::LoadReport& report) {
    nlohmann::json per_round = nlohmann::json::array();
    for (const auto& round : report.per_round)
        per_round.push_back({round.sent, round.received});
    return {{"rounds", report.rounds()}, {"L", report.max_load()}, {"per_round", per_round}};
}

inline nlohmann::json per_phase_json(const std::vector<PhaseStats>& phases) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ph : phases)
        arr.push_back({{"level", ph.level},
                       {"replications", ph.replications},
                       {"active_points", ph.active_points},
                       {"tuples_generated", ph.tuples_generated},
                       {"tuples_pruned", ph.tuples_pruned}});
    return arr;
}

inline nlohmann::json density_profile_json(const DensityProfile& prof) {
    auto side = [](const std::vector<std::int64_t>& near,
                   const std::vector<std::int64_t>& cnear, const std::vector<int>& level) {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < near.size(); ++i)
            arr.push_back({{"near", near[i]}, {"cnear", cnear[i]}, {"level", level[i]}});
        return arr;
    };
    return {{"kappa", prof.kappa},
            {"out_r", prof.out_r},
            {"out_cr", prof.out_cr},
            {"out_r_by_level", prof.out_r_by_level},
            {"points_r", side(prof.near_r, prof.cnear_r, prof.level_r)},
            {"points_s", side(prof.near_s, prof.cnear_s, prof.level_s)}};
}

}  // namespace simjoin
