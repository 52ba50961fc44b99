#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "mucc/energy.hpp"
#include "mucc/model.hpp"

namespace mucc {

// Result of the one-demander/one-provider offload subproblem: the bits the
// demander should transfer and the joint energy saved versus both UEs
// computing alone. Zero offload is always feasible, so benefit >= 0.
struct PairBenefit {
    int rd = -1;
    int rp = -1;
    double benefit_j = 0.0;
    double optimal_load_bits = 0.0;
};

// Strictly ordered candidate ranking, most preferred first. Candidates the
// owner would not cooperate with are simply absent.
struct PreferenceList {
    int owner = -1;
    std::vector<int> ranked;

    bool lists(int candidate) const {
        return std::find(ranked.begin(), ranked.end(), candidate) != ranked.end();
    }
    // Position in the ranking (0 = best), or -1 if unlisted.
    int rank_of(int candidate) const {
        for (std::size_t i = 0; i < ranked.size(); ++i)
            if (ranked[i] == candidate) return static_cast<int>(i);
        return -1;
    }
};

// Transmit power of a lone demander sending `load_bits` to its provider.
inline double single_link_tx_power(double load_bits, double gain,
                                   const SystemParams& params) {
    const double n0 = params.noise_power_w / gain;
    return n0 * (std::exp2(load_bits / params.slot_bandwidth_product()) - 1.0);
}

// Largest load a lone demander can send without exceeding its power cap,
// further limited by its task size. The power curve is strictly increasing
// in the load, so bisection pins the cap root.
inline double max_feasible_load(double gain, double max_tx_power_w, double task_bits,
                                const SystemParams& params) {
    if (task_bits <= 0.0) return 0.0;
    if (single_link_tx_power(task_bits, gain, params) <= max_tx_power_w)
        return task_bits;
    auto excess = [&](double l) {
        return single_link_tx_power(l, gain, params) - max_tx_power_w;
    };
    return bisect_increasing(excess, 0.0, task_bits, 1e-12);
}

namespace detail {

// Joint energy of the pair when the demander offloads l bits: demander's
// remaining compute + uplink, provider's enlarged compute. Strictly convex
// in l (two convex cubics plus an exponential), so the saving is concave
// and a golden-section search is exact.
struct PairObjective {
    const UeProfile* rd;
    const UeProfile* rp;
    double gain;
    const SystemParams* params;

    double pair_energy(double l) const {
        const double local =
            dvfs_energy(rd->cap_coeff, rd->cycles_per_bit, rd->task_bits - l,
                        params->slot_seconds);
        const double uplink =
            single_link_tx_power(l, gain, *params) * params->slot_seconds;
        const double provider =
            dvfs_energy(rp->cap_coeff, rp->cycles_per_bit, rp->task_bits + l,
                        params->slot_seconds);
        return local + uplink + provider;
    }
};

inline double solve_tolerance(double task_bits) {
    return std::max(1.0, 1e-9 * task_bits);
}

}  // namespace detail

// Maximize the joint energy saving of a (demander, provider) pair over the
// demander's offload amount, subject to its task size and power cap.
inline PairBenefit pair_optimal_offload(const UeProfile& rd, const UeProfile& rp,
                                        double gain, const SystemParams& params) {
    check_arg(rd.id != rp.id, "pair must be two distinct UEs");
    check_arg(gain > 0.0, "gain must be > 0");

    PairBenefit out;
    out.rd = rd.id;
    out.rp = rp.id;

    const double cap = max_feasible_load(gain, rd.max_tx_power_w, rd.task_bits, params);
    if (cap <= 0.0) return out;

    detail::PairObjective obj{&rd, &rp, gain, &params};
    const double baseline = standalone_energy(rd, params.slot_seconds) +
                            standalone_energy(rp, params.slot_seconds);
    const Minimum1d best = golden_section_minimize(
        [&](double l) { return obj.pair_energy(l); }, 0.0, cap,
        detail::solve_tolerance(rd.task_bits));

    const double saving = baseline - best.value;
    if (saving > 0.0) {
        out.benefit_j = saving;
        out.optimal_load_bits = best.x;
    }
    return out;
}

// Saving the demander alone realizes (its provider's compute cost is not its
// concern); drives the demander-side association ranking.
inline double rd_benefit(const Scenario& sc, int rd, int rp) {
    const UeProfile& d = sc.ue(rd);
    const double gain = sc.gain(rd, rp);
    const double cap = max_feasible_load(gain, d.max_tx_power_w, d.task_bits, sc.params);
    if (cap <= 0.0) return 0.0;
    auto rd_energy = [&](double l) {
        return dvfs_energy(d.cap_coeff, d.cycles_per_bit, d.task_bits - l,
                           sc.params.slot_seconds) +
               single_link_tx_power(l, gain, sc.params) * sc.params.slot_seconds;
    };
    const double baseline = standalone_energy(d, sc.params.slot_seconds);
    const Minimum1d best = golden_section_minimize(rd_energy, 0.0, cap,
                                                   detail::solve_tolerance(d.task_bits));
    return std::max(0.0, baseline - best.value);
}

// Saving the provider credits to hosting this demander: the joint saving of
// the pair. Drives the provider-side association ranking.
inline double rp_benefit(const Scenario& sc, int rp, int rd) {
    return pair_optimal_offload(sc.ue(rd), sc.ue(rp), sc.gain(rd, rp), sc.params).benefit_j;
}

// Evaluate both role orientations of an unordered pair and keep the better
// one. Only UEs in `rp_eligible` may take the provider side; ties go to the
// lower id as demander.
inline PairBenefit oriented_pair_benefit(const Scenario& sc, int m, int k,
                                         const std::vector<char>& rp_eligible) {
    check_arg(m != k, "pair must be two distinct UEs");
    const int lo = std::min(m, k), hi = std::max(m, k);
    const double gain = sc.gain(lo, hi);

    PairBenefit best;
    best.rd = lo;
    best.rp = hi;
    if (rp_eligible[static_cast<std::size_t>(hi)]) {
        best = pair_optimal_offload(sc.ue(lo), sc.ue(hi), gain, sc.params);
    }
    if (rp_eligible[static_cast<std::size_t>(lo)]) {
        const PairBenefit other = pair_optimal_offload(sc.ue(hi), sc.ue(lo), gain, sc.params);
        if (other.benefit_j > best.benefit_j) best = other;
    }
    return best;
}

// All pairwise oriented benefits plus per-UE roommate rankings. The benefit
// is shared by both UEs of a pair, so the listing relation is symmetric.
struct RoommatePrefs {
    int n = 0;
    std::vector<PreferenceList> lists;        // indexed by UE id
    std::map<std::pair<int, int>, PairBenefit> pair_table;  // key (lo, hi)

    const PairBenefit& pair(int m, int k) const {
        auto it = pair_table.find({std::min(m, k), std::max(m, k)});
        require(it != pair_table.end(), "pair missing from benefit table");
        return it->second;
    }
};

inline RoommatePrefs build_roommate_prefs(const Scenario& sc,
                                          const std::vector<int>& eligible_rps) {
    RoommatePrefs prefs;
    prefs.n = sc.size();
    prefs.lists.resize(static_cast<std::size_t>(sc.size()));

    std::vector<char> eligible(static_cast<std::size_t>(sc.size()), 0);
    for (int id : eligible_rps) eligible[static_cast<std::size_t>(id)] = 1;

    for (int m = 0; m < sc.size(); ++m) {
        for (int k = m + 1; k < sc.size(); ++k) {
            PairBenefit b = oriented_pair_benefit(sc, m, k, eligible);
            if (b.benefit_j > sc.params.coop_epsilon_j)
                prefs.pair_table.emplace(std::make_pair(m, k), b);
        }
    }

    for (int m = 0; m < sc.size(); ++m) {
        // Rank acceptable partners by shared benefit, ids breaking ties.
        std::vector<std::pair<double, int>> ranked;
        for (int k = 0; k < sc.size(); ++k) {
            if (k == m) continue;
            auto it = prefs.pair_table.find({std::min(m, k), std::max(m, k)});
            if (it != prefs.pair_table.end())
                ranked.emplace_back(it->second.benefit_j, k);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        PreferenceList& pl = prefs.lists[static_cast<std::size_t>(m)];
        pl.owner = m;
        for (const auto& [benefit, id] : ranked) pl.ranked.push_back(id);
    }
    return prefs;
}

// Association-stage rankings: demanders rank providers by their own saving,
// providers rank demanders by the joint pair saving. Candidates whose
// benefit does not clear the cooperation threshold are unlisted.
struct AssociationPrefs {
    std::vector<int> rd_ids;
    std::vector<int> rp_ids;
    std::vector<PreferenceList> rd_lists;  // indexed by UE id
    std::vector<PreferenceList> rp_lists;  // indexed by UE id
};

inline AssociationPrefs build_association_prefs(const Scenario& sc,
                                                const std::vector<int>& rds,
                                                const std::vector<int>& rps) {
    AssociationPrefs prefs;
    prefs.rd_ids = rds;
    prefs.rp_ids = rps;
    std::sort(prefs.rd_ids.begin(), prefs.rd_ids.end());
    std::sort(prefs.rp_ids.begin(), prefs.rp_ids.end());
    prefs.rd_lists.resize(static_cast<std::size_t>(sc.size()));
    prefs.rp_lists.resize(static_cast<std::size_t>(sc.size()));

    auto rank_into = [&](PreferenceList& pl, int owner,
                         const std::vector<int>& candidates, auto&& benefit_fn) {
        pl.owner = owner;
        std::vector<std::pair<double, int>> ranked;
        for (int c : candidates) {
            const double b = benefit_fn(owner, c);
            if (b > sc.params.coop_epsilon_j) ranked.emplace_back(b, c);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (const auto& [benefit, id] : ranked) pl.ranked.push_back(id);
    };

    for (int i : prefs.rd_ids)
        rank_into(prefs.rd_lists[static_cast<std::size_t>(i)], i, prefs.rp_ids,
                  [&](int rd, int rp) { return rd_benefit(sc, rd, rp); });
    for (int j : prefs.rp_ids)
        rank_into(prefs.rp_lists[static_cast<std::size_t>(j)], j, prefs.rd_ids,
                  [&](int rp, int rd) { return rp_benefit(sc, rp, rd); });
    return prefs;
}

}  // namespace mucc
