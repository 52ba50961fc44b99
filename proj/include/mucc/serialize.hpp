#pragma once

#include <algorithm>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mucc/pipeline.hpp"

namespace mucc {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario JSON layout (documented in README): exact-roundtrip doubles, the
// full symmetric gain matrix with a zero diagonal.
// ---------------------------------------------------------------------------

inline json to_json(const SystemParams& p) {
    return json{{"slot_seconds", p.slot_seconds},
                {"bandwidth_hz", p.bandwidth_hz},
                {"noise_power_w", p.noise_power_w},
                {"pathloss_exponent", p.pathloss_exponent},
                {"area_side_m", p.area_side_m},
                {"coop_epsilon_j", p.coop_epsilon_j},
                {"rng_seed", p.rng_seed}};
}

inline SystemParams system_params_from_json(const json& j) {
    SystemParams p;
    p.slot_seconds = j.at("slot_seconds").get<double>();
    p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    p.noise_power_w = j.at("noise_power_w").get<double>();
    p.pathloss_exponent = j.at("pathloss_exponent").get<double>();
    p.area_side_m = j.at("area_side_m").get<double>();
    p.coop_epsilon_j = j.at("coop_epsilon_j").get<double>();
    p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return p;
}

inline json to_json(const UeProfile& u) {
    return json{{"id", u.id},
                {"x_m", u.x_m},
                {"y_m", u.y_m},
                {"task_bits", u.task_bits},
                {"cycles_per_bit", u.cycles_per_bit},
                {"cap_coeff", u.cap_coeff},
                {"max_tx_power_w", u.max_tx_power_w},
                {"quota", u.quota},
                {"available_energy_j", u.available_energy_j},
                {"energy_threshold_j", u.energy_threshold_j}};
}

inline UeProfile ue_profile_from_json(const json& j) {
    UeProfile u;
    u.id = j.at("id").get<int>();
    u.x_m = j.at("x_m").get<double>();
    u.y_m = j.at("y_m").get<double>();
    u.task_bits = j.at("task_bits").get<double>();
    u.cycles_per_bit = j.at("cycles_per_bit").get<double>();
    u.cap_coeff = j.at("cap_coeff").get<double>();
    u.max_tx_power_w = j.at("max_tx_power_w").get<double>();
    u.quota = j.at("quota").get<int>();
    u.available_energy_j = j.at("available_energy_j").get<double>();
    u.energy_threshold_j = j.at("energy_threshold_j").get<double>();
    return u;
}

inline json scenario_to_json(const Scenario& sc) {
    json ues = json::array();
    for (const UeProfile& u : sc.ues) ues.push_back(to_json(u));
    json gains = json::array();
    for (int m = 0; m < sc.size(); ++m) {
        json row = json::array();
        for (int k = 0; k < sc.size(); ++k)
            row.push_back(m == k ? 0.0 : sc.channels(m, k));
        gains.push_back(std::move(row));
    }
    return json{{"params", to_json(sc.params)}, {"ues", std::move(ues)},
                {"gains", std::move(gains)}};
}

inline Scenario scenario_from_json(const json& j) {
    Scenario sc;
    sc.params = system_params_from_json(j.at("params"));
    for (const json& u : j.at("ues")) sc.ues.push_back(ue_profile_from_json(u));
    const int n = static_cast<int>(sc.ues.size());
    sc.channels = ChannelGains(n);
    const json& gains = j.at("gains");
    check_arg(static_cast<int>(gains.size()) == n, "gain matrix dimension mismatch");
    for (int m = 0; m < n; ++m)
        for (int k = m + 1; k < n; ++k)
            sc.channels.set(m, k, gains.at(m).at(k).get<double>());
    sc.validate();
    return sc;
}

// ---------------------------------------------------------------------------
// Matching-state and trace serialization for the CLI
// ---------------------------------------------------------------------------

inline json to_json(const RolePartition& p) {
    json pairs = json::array();
    for (const RoommatePair& rp : p.roommate_pairs)
        pairs.push_back(json{{"rd", rp.rd}, {"rp", rp.rp}});
    return json{{"rds", p.rds}, {"rps", p.rps}, {"sus", p.sus},
                {"roommate_pairs", std::move(pairs)}};
}

inline json to_json(const Association& a) {
    json groups = json::array();
    for (int j = 0; j < a.size(); ++j)
        if (!a.members_of[static_cast<std::size_t>(j)].empty())
            groups.push_back(json{{"rp", j},
                                  {"members", a.members_of[static_cast<std::size_t>(j)]}});
    return json{{"groups", std::move(groups)}};
}

inline json to_json(const GroupLoads& g) {
    return json{{"rp", g.rp}, {"members", g.members}, {"loads_bits", g.loads}};
}

inline json to_json(const RsoRound& r) {
    return json{{"cabal", r.cabal.members},
                {"accomplices", r.accomplices},
                {"accepted", r.accepted},
                {"note", r.note}};
}

inline json pipeline_trace_json(const Scenario& sc, const PipelineResult& r) {
    json plans = json::array();
    for (const GroupLoads& g : r.plans) plans.push_back(to_json(g));
    json rounds = json::array();
    for (const RsoRound& round : r.rso_rounds) rounds.push_back(to_json(round));

    json per_ue = json::array();
    std::vector<double> offload(static_cast<std::size_t>(sc.size()), 0.0);
    std::vector<double> power(static_cast<std::size_t>(sc.size()), 0.0);
    for (const GroupLoads& g : r.plans)
        for (std::size_t i = 0; i < g.count(); ++i) {
            offload[static_cast<std::size_t>(g.members[i])] = g.loads[i];
            power[static_cast<std::size_t>(g.members[i])] =
                tx_power(g, i, sc.channels, sc.params);
        }
    for (int m = 0; m < sc.size(); ++m) {
        std::string role = "su";
        if (std::find(r.partition.rds.begin(), r.partition.rds.end(), m) !=
            r.partition.rds.end())
            role = "rd";
        else if (std::find(r.partition.rps.begin(), r.partition.rps.end(), m) !=
                 r.partition.rps.end())
            role = "rp";
        per_ue.push_back(json{{"ue", m},
                              {"role", role},
                              {"partner", r.association.rp_of[static_cast<std::size_t>(m)]},
                              {"offload_bits", offload[static_cast<std::size_t>(m)]},
                              {"tx_power_w", power[static_cast<std::size_t>(m)]}});
    }

    return json{{"eligible_rps", r.eligible_rps},
                {"partition", to_json(r.partition)},
                {"association_before_rso", to_json(r.before_rso)},
                {"association", to_json(r.association)},
                {"rso_rounds", std::move(rounds)},
                {"rso_cabal_free", r.rso_cabal_free},
                {"rso_truncated", r.rso_truncated},
                {"plans", std::move(plans)},
                {"per_ue", std::move(per_ue)},
                {"energy_j", r.energy_j},
                {"sca_iterations", r.sca_iterations}};
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    check_arg(out.good(), "cannot open output file");
    out << content;
    check_arg(out.good(), "failed writing output file");
}

}  // namespace mucc
