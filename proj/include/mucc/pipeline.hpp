#pragma once

#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mucc/rso.hpp"
#include "mucc/sca.hpp"

namespace mucc {

struct StageTimings {
    double prefs_ms = 0.0;
    double roles_ms = 0.0;
    double assoc_ms = 0.0;
    double rso_ms = 0.0;
    double sca_ms = 0.0;
};

struct PipelineOptions {
    bool enable_rso = true;
    int rso_max_rounds = 50;
    ScaConfig sca;
};

struct PipelineResult {
    std::vector<int> eligible_rps;
    RolePartition partition;
    AssociationPrefs assoc_prefs;   // true lists
    Association gs_association{0};  // raw deferred-acceptance output
    bool gs_accepted = false;       // whether it displaced the roommate pairing
    Association before_rso{0};      // association entering the rotation stage
    Association association{0};
    std::vector<RsoRound> rso_rounds;
    bool rso_cabal_free = false;
    bool rso_truncated = false;
    std::vector<GroupLoads> plans;
    double energy_j = 0.0;
    int sca_iterations = 0;
    StageTimings timings;
};

namespace detail {

inline double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

// Deduplicated group solves keyed by (provider, member set); reused across
// rotation rounds and the final allocation.
class GroupSolveCache {
public:
    GroupSolveCache(const Scenario& sc, const ScaConfig& cfg) : sc_(sc), cfg_(cfg) {}

    const ScaResult& solve(int rp, const std::vector<int>& members) {
        std::pair<int, std::vector<int>> key{rp, members};
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            Group g{rp, members};
            it = cache_.emplace(std::move(key), solve_group(sc_, g, cfg_)).first;
        }
        return it->second;
    }

    // Total system energy for an association, with every group re-optimized.
    double association_energy(const Association& assoc) {
        double total = 0.0;
        std::vector<char> covered(static_cast<std::size_t>(sc_.size()), 0);
        for (int j = 0; j < sc_.size(); ++j) {
            const auto& ms = assoc.members_of[static_cast<std::size_t>(j)];
            if (ms.empty()) continue;
            total += solve(j, ms).objective_j;
            covered[static_cast<std::size_t>(j)] = 1;
            for (int i : ms) covered[static_cast<std::size_t>(i)] = 1;
        }
        for (int m = 0; m < sc_.size(); ++m)
            if (!covered[static_cast<std::size_t>(m)])
                total += standalone_energy(sc_.ue(m), sc_.params.slot_seconds);
        return total;
    }

private:
    const Scenario& sc_;
    ScaConfig cfg_;
    std::map<std::pair<int, std::vector<int>>, ScaResult> cache_;
};

}  // namespace detail

// Hard validation of every structural constraint a finished plan must obey:
// role sets partition the UEs, offloads stay inside their boxes, each
// demander has one provider, quotas and the provider battery gate hold, and
// no transmit power exceeds its cap. A violation is a defect, never silent.
inline void audit_constraints(const Scenario& sc, const RolePartition& part,
                              const Association& assoc,
                              const std::vector<GroupLoads>& plans) {
    part.validate(sc.size());

    std::vector<char> is_rd(static_cast<std::size_t>(sc.size()), 0);
    std::vector<char> is_rp(static_cast<std::size_t>(sc.size()), 0);
    for (int id : part.rds) is_rd[static_cast<std::size_t>(id)] = 1;
    for (int id : part.rps) is_rp[static_cast<std::size_t>(id)] = 1;

    for (int id : part.rps) {
        const UeProfile& u = sc.ue(id);
        require(u.available_energy_j >= u.energy_threshold_j,
                "provider below its battery threshold");
    }

    std::vector<int> providers_of(static_cast<std::size_t>(sc.size()), 0);
    for (const GroupLoads& g : plans) {
        g.validate(sc);  // box and quota constraints
        require(is_rp[static_cast<std::size_t>(g.rp)], "plan provider lacks the provider role");
        for (std::size_t i = 0; i < g.count(); ++i) {
            const int id = g.members[i];
            require(is_rd[static_cast<std::size_t>(id)], "plan member lacks the demander role");
            providers_of[static_cast<std::size_t>(id)] += 1;
            require(assoc.rp_of[static_cast<std::size_t>(id)] == g.rp,
                    "plan disagrees with the association");
            const double p = tx_power(g, i, sc.channels, sc.params);
            require(p <= sc.ue(id).max_tx_power_w * (1.0 + 1e-9),
                    "transmit power exceeds the cap");
        }
    }
    for (int id : part.rds)
        require(providers_of[static_cast<std::size_t>(id)] <= 1,
                "demander offloads to more than one provider");
}

// Role-partition-aware total energy; validates that the plans are consistent
// with the partition before summing.
inline double system_energy(const RolePartition& part, const std::vector<GroupLoads>& plans,
                            const Scenario& sc) {
    std::vector<char> is_rd(static_cast<std::size_t>(sc.size()), 0);
    std::vector<char> is_rp(static_cast<std::size_t>(sc.size()), 0);
    for (int id : part.rds) is_rd[static_cast<std::size_t>(id)] = 1;
    for (int id : part.rps) is_rp[static_cast<std::size_t>(id)] = 1;
    for (const GroupLoads& g : plans) {
        require(is_rp[static_cast<std::size_t>(g.rp)], "plan provider lacks the provider role");
        for (int id : g.members)
            require(is_rd[static_cast<std::size_t>(id)], "plan member lacks the demander role");
    }
    return system_energy(plans, sc);
}

// The full per-slot pipeline: battery gate, roommate role assignment,
// quota-constrained association, rotation-swap improvement, then per-group
// load optimization. Constraints are audited before returning.
inline PipelineResult run_pipeline(const Scenario& sc, const PipelineOptions& opt = {}) {
    sc.validate();
    PipelineResult res;
    detail::GroupSolveCache cache(sc, opt.sca);

    double t0 = detail::now_ms();
    res.eligible_rps = role_control(sc);
    const RoommatePrefs roommate_prefs = build_roommate_prefs(sc, res.eligible_rps);
    double t1 = detail::now_ms();
    res.timings.prefs_ms = t1 - t0;

    res.partition = assign_roles(roommate_prefs);
    double t2 = detail::now_ms();
    res.timings.roles_ms = t2 - t1;

    res.assoc_prefs = build_association_prefs(sc, res.partition.rds, res.partition.rps);
    std::vector<int> quotas(static_cast<std::size_t>(sc.size()), 0);
    for (int m = 0; m < sc.size(); ++m) quotas[static_cast<std::size_t>(m)] = sc.ue(m).quota;
    res.gs_association = gale_shapley(res.assoc_prefs, quotas);

    // The deferred-acceptance association replaces the roommate pairing only
    // if the re-optimized system energy does not increase: demander-side
    // rankings ignore provider compute costs and shared-slot interference,
    // so the unguarded swap can lose real energy. Same guard as the
    // rotation rounds below.
    Association pairing(sc.size());
    for (const RoommatePair& p : res.partition.roommate_pairs) pairing.link(p.rd, p.rp);
    res.gs_accepted = cache.association_energy(res.gs_association) <=
                      cache.association_energy(pairing) + 1e-9;
    res.before_rso = res.gs_accepted ? res.gs_association : pairing;
    res.association = res.before_rso;
    double t3 = detail::now_ms();
    res.timings.assoc_ms = t3 - t2;

    if (opt.enable_rso) {
        // A rotation is adopted only when no demander is worse off and the
        // re-optimized system energy does not increase — per round and
        // cumulatively, so the slack cannot telescope across rounds.
        const double pre_rso_energy = cache.association_energy(res.before_rso);
        RoundFilter energy_guard = [&, pre_rso_energy](const Association& cur,
                                                       const Association& cand) {
            const double cand_energy = cache.association_energy(cand);
            return cand_energy <= cache.association_energy(cur) + 1e-9 &&
                   cand_energy <= pre_rso_energy + 1e-9;
        };
        RsoResult rso = rso_loop(res.assoc_prefs, quotas, res.before_rso,
                                 opt.rso_max_rounds, energy_guard);
        res.association = rso.association;
        res.rso_rounds = std::move(rso.rounds);
        res.rso_cabal_free = rso.cabal_free;
        res.rso_truncated = rso.truncated;
    }
    double t4 = detail::now_ms();
    res.timings.rso_ms = t4 - t3;

    for (int j = 0; j < sc.size(); ++j) {
        const auto& ms = res.association.members_of[static_cast<std::size_t>(j)];
        if (ms.empty()) continue;
        const ScaResult& solved = cache.solve(j, ms);
        res.plans.push_back(solved.plan);
        res.sca_iterations += solved.iterations;
    }
    res.energy_j = system_energy(res.partition, res.plans, sc);
    double t5 = detail::now_ms();
    res.timings.sca_ms = t5 - t4;

    audit_constraints(sc, res.partition, res.association, res.plans);
    return res;
}

// Per-demander offload amounts with the rotation stage disabled and enabled,
// from the same scenario.
struct OffloadSnapshot {
    std::vector<double> before_bits;  // by UE id; 0 for non-demanders
    std::vector<double> after_bits;
    double energy_before_j = 0.0;
    double energy_after_j = 0.0;
    PipelineResult before;
    PipelineResult after;
};

inline OffloadSnapshot offload_snapshot(const Scenario& sc, const PipelineOptions& opt = {}) {
    PipelineOptions off = opt;
    off.enable_rso = false;
    PipelineOptions on = opt;
    on.enable_rso = true;

    OffloadSnapshot snap;
    snap.before = run_pipeline(sc, off);
    snap.after = run_pipeline(sc, on);
    snap.energy_before_j = snap.before.energy_j;
    snap.energy_after_j = snap.after.energy_j;
    snap.before_bits.assign(static_cast<std::size_t>(sc.size()), 0.0);
    snap.after_bits.assign(static_cast<std::size_t>(sc.size()), 0.0);
    for (const GroupLoads& g : snap.before.plans)
        for (std::size_t i = 0; i < g.count(); ++i)
            snap.before_bits[static_cast<std::size_t>(g.members[i])] = g.loads[i];
    for (const GroupLoads& g : snap.after.plans)
        for (std::size_t i = 0; i < g.count(); ++i)
            snap.after_bits[static_cast<std::size_t>(g.members[i])] = g.loads[i];
    return snap;
}

}  // namespace mucc
