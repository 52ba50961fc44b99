#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "mucc/pipeline.hpp"

namespace mucc {

struct EsResult {
    RolePartition partition;
    std::vector<GroupLoads> plans;
    double energy_j = 0.0;
    std::int64_t configurations = 0;
};

namespace detail {

// Value of one candidate group under the exhaustive search. Uses the same
// per-group optimizer as the pipeline, then tries to refine two-member
// groups with a coarse grid plus coordinate descent so the reference never
// loses to the pipeline on the identical group.
struct EsGroupEval {
    GroupLoads plan;
    double value = 0.0;
};

inline EsGroupEval es_evaluate_group(const Scenario& sc, int rp,
                                     const std::vector<int>& members,
                                     const ScaConfig& cfg) {
    Group grp{rp, members};
    ScaResult solved = solve_group(sc, grp, cfg);
    EsGroupEval out{solved.plan, solved.objective_j};
    if (members.size() == 1) {
        // The one-dimensional pair search is exact for a lone member; keep
        // whichever solution is better so the reference never loses.
        const PairBenefit pb = pair_optimal_offload(
            sc.ue(members[0]), sc.ue(rp), sc.gain(members[0], rp), sc.params);
        GroupLoads alt;
        alt.rp = rp;
        alt.members = members;
        alt.loads = {pb.optimal_load_bits};
        const double v = group_objective(sc, alt);
        if (v < out.value) {
            out.value = v;
            out.plan = alt;
        }
    }
    if (members.size() == 2) {
        auto [grid_plan, grid_value] = grid_oracle(sc, grp, 40);
        GroupLoads refined = grid_value < out.value ? grid_plan : out.plan;
        double value = std::min(grid_value, out.value);
        // Coordinate descent from the better start.
        const double caps[2] = {sc.ue(members[0]).task_bits, sc.ue(members[1]).task_bits};
        double step = std::max(caps[0], caps[1]) / 40.0;
        GroupLoads probe = refined;
        while (step > 0.5) {
            bool improved = false;
            for (std::size_t k = 0; k < 2; ++k) {
                for (double dir : {-1.0, 1.0}) {
                    probe.loads = refined.loads;
                    probe.loads[k] = std::clamp(refined.loads[k] + dir * step, 0.0, caps[k]);
                    if (!power_feasible(sc, probe)) continue;
                    const double v = group_objective(sc, probe);
                    if (v < value) {
                        value = v;
                        refined = probe;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (value < out.value) {
            out.value = value;
            out.plan = refined;
        }
    }
    return out;
}

}  // namespace detail

// Enumerate every role partition and quota-respecting association for a
// small scenario and return the minimum-energy configuration. Each distinct
// (provider, member set) group is optimized once and memoized. Ties prefer
// fewer cooperating pairs, then the earlier configuration in enumeration
// order.
inline EsResult exhaustive_search(const Scenario& sc, int n_limit = 8) {
    const int n = sc.size();
    check_arg(n <= n_limit, "scenario too large for exhaustive search");

    const std::vector<int> eligible = role_control(sc);
    std::vector<char> can_provide(static_cast<std::size_t>(n), 0);
    for (int id : eligible) can_provide[static_cast<std::size_t>(id)] = 1;

    std::vector<double> alone(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m)
        alone[static_cast<std::size_t>(m)] = standalone_energy(sc.ue(m), sc.params.slot_seconds);

    // Memoized group values keyed by provider and member bitmask.
    std::map<std::pair<int, unsigned>, detail::EsGroupEval> memo;
    ScaConfig cfg;
    auto group_eval = [&](int rp, unsigned mask) -> const detail::EsGroupEval& {
        auto it = memo.find({rp, mask});
        if (it == memo.end()) {
            std::vector<int> members;
            for (int m = 0; m < n; ++m)
                if (mask & (1u << m)) members.push_back(m);
            it = memo.emplace(std::make_pair(rp, mask),
                              detail::es_evaluate_group(sc, rp, members, cfg)).first;
        }
        return it->second;
    };

    struct Config {
        std::vector<std::pair<int, unsigned>> groups;  // (provider, member mask)
        double energy = 0.0;
        int links = 0;
    };
    Config best;
    best.energy = 0.0;
    for (int m = 0; m < n; ++m) best.energy += alone[static_cast<std::size_t>(m)];
    best.links = 0;  // the all-standalone configuration
    std::int64_t count = 1;

    // Recurse over the lowest unassigned UE: leave it standalone or embed it
    // in a group with 1 or 2 partners (as provider or demander).
    std::vector<std::pair<int, unsigned>> current;
    auto lowest_free = [&](unsigned used) {
        for (int m = 0; m < n; ++m)
            if (!(used & (1u << m))) return m;
        return n;
    };

    std::function<void(unsigned, double, int)> recurse = [&](unsigned used, double energy,
                                                             int links) {
        const int u = lowest_free(used);
        if (u == n) {
            if (!current.empty()) {
                ++count;
                if (energy < best.energy ||
                    (energy == best.energy && links < best.links)) {
                    best.energy = energy;
                    best.links = links;
                    best.groups = current;
                }
            }
            return;
        }
        // Option 1: UE u stays standalone for now.
        recurse(used | (1u << u), energy + alone[static_cast<std::size_t>(u)], links);

        // Option 2: u joins a new group with partners of higher ids only
        // (every group is generated exactly once, keyed by its lowest id).
        std::vector<int> others;
        for (int m = 0; m < n; ++m)
            if (m != u && !(used & (1u << m))) others.push_back(m);

        auto try_group = [&](const std::vector<int>& group_ids) {
            unsigned gmask = 0;
            for (int id : group_ids) gmask |= (1u << id);
            for (int rp : group_ids) {
                if (!can_provide[static_cast<std::size_t>(rp)]) continue;
                if (static_cast<int>(group_ids.size()) - 1 > sc.ue(rp).quota) continue;
                const unsigned members_mask = gmask & ~(1u << rp);
                const detail::EsGroupEval& eval = group_eval(rp, members_mask);
                current.emplace_back(rp, members_mask);
                recurse(used | gmask, energy + eval.value,
                        links + static_cast<int>(group_ids.size()) - 1);
                current.pop_back();
            }
        };

        for (std::size_t a = 0; a < others.size(); ++a) {
            try_group({u, others[a]});
            for (std::size_t b = a + 1; b < others.size(); ++b)
                try_group({u, others[a], others[b]});
        }
    };
    recurse(0, 0.0, 0);

    EsResult res;
    res.configurations = count;
    res.energy_j = best.energy;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (const auto& [rp, mask] : best.groups) {
        const detail::EsGroupEval& eval = group_eval(rp, mask);
        res.plans.push_back(eval.plan);
        res.partition.rps.push_back(rp);
        used[static_cast<std::size_t>(rp)] = 1;
        for (int m = 0; m < n; ++m)
            if (mask & (1u << m)) {
                res.partition.rds.push_back(m);
                used[static_cast<std::size_t>(m)] = 1;
            }
    }
    for (int m = 0; m < n; ++m)
        if (!used[static_cast<std::size_t>(m)]) res.partition.sus.push_back(m);
    std::sort(res.partition.rds.begin(), res.partition.rds.end());
    std::sort(res.partition.rps.begin(), res.partition.rps.end());
    res.partition.validate(n);
    return res;
}

// Everyone computes locally.
inline double baseline_local(const Scenario& sc) {
    double total = 0.0;
    for (int m = 0; m < sc.size(); ++m)
        total += standalone_energy(sc.ue(m), sc.params.slot_seconds);
    return total;
}

struct BaselineResult {
    double energy_j = 0.0;
    RolePartition partition;
    std::vector<GroupLoads> plans;
};

// Uniformly random disjoint pairs with random orientation, each pair solved
// by the one-dimensional search. A UE below its battery threshold never
// takes the provider side; a pair with no valid orientation dissolves.
inline BaselineResult baseline_random_pairs(const Scenario& sc, std::uint64_t seed) {
    const std::vector<int> eligible = role_control(sc);
    std::vector<char> can_provide(static_cast<std::size_t>(sc.size()), 0);
    for (int id : eligible) can_provide[static_cast<std::size_t>(id)] = 1;

    std::vector<int> order(static_cast<std::size_t>(sc.size()));
    for (int m = 0; m < sc.size(); ++m) order[static_cast<std::size_t>(m)] = m;
    Rng rng(seed);
    shuffle_deterministic(order, rng);

    BaselineResult res;
    std::vector<char> paired(static_cast<std::size_t>(sc.size()), 0);
    for (std::size_t idx = 0; idx + 1 < order.size(); idx += 2) {
        const int a = order[idx];
        const int b = order[idx + 1];
        const bool a_can = can_provide[static_cast<std::size_t>(a)];
        const bool b_can = can_provide[static_cast<std::size_t>(b)];
        int rd, rp;
        if (a_can && b_can) {
            const bool a_provides = (rng() & 1u) != 0;
            rd = a_provides ? b : a;
            rp = a_provides ? a : b;
        } else if (a_can) {
            rd = b;
            rp = a;
        } else if (b_can) {
            rd = a;
            rp = b;
        } else {
            continue;  // neither may provide: both stay standalone
        }
        const PairBenefit pb =
            pair_optimal_offload(sc.ue(rd), sc.ue(rp), sc.gain(rd, rp), sc.params);
        GroupLoads g;
        g.rp = rp;
        g.members = {rd};
        g.loads = {pb.optimal_load_bits};
        res.plans.push_back(std::move(g));
        res.partition.rds.push_back(rd);
        res.partition.rps.push_back(rp);
        res.partition.roommate_pairs.push_back({rd, rp});
        paired[static_cast<std::size_t>(rd)] = 1;
        paired[static_cast<std::size_t>(rp)] = 1;
    }
    for (int m = 0; m < sc.size(); ++m)
        if (!paired[static_cast<std::size_t>(m)]) res.partition.sus.push_back(m);
    std::sort(res.partition.rds.begin(), res.partition.rds.end());
    std::sort(res.partition.rps.begin(), res.partition.rps.end());
    res.energy_j = system_energy(res.plans, sc);
    return res;
}

// Role assignment only: each roommate pair runs its one-dimensional optimal
// offload; no quota association, no rotation stage.
inline BaselineResult baseline_roommates_only(const Scenario& sc) {
    const std::vector<int> eligible = role_control(sc);
    const RoommatePrefs prefs = build_roommate_prefs(sc, eligible);
    BaselineResult res;
    res.partition = assign_roles(prefs);
    for (const RoommatePair& p : res.partition.roommate_pairs) {
        const PairBenefit& pb = prefs.pair(p.rd, p.rp);
        GroupLoads g;
        g.rp = p.rp;
        g.members = {p.rd};
        g.loads = {pb.optimal_load_bits};
        res.plans.push_back(std::move(g));
    }
    res.energy_j = system_energy(res.plans, sc);
    return res;
}

// Roles plus quota association plus per-group optimization, without the
// rotation stage.
inline BaselineResult baseline_roommates_gs(const Scenario& sc) {
    PipelineOptions opt;
    opt.enable_rso = false;
    PipelineResult r = run_pipeline(sc, opt);
    return {r.energy_j, std::move(r.partition), std::move(r.plans)};
}

}  // namespace mucc
