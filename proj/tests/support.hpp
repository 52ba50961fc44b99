#pragma once

// Shared fixtures for the test suites: default parameters, hand-built
// scenarios with chosen gain matrices, and small brute-force helpers used
// as independent references.

#include <cmath>
#include <vector>

#include "mucc/matching.hpp"
#include "mucc/model.hpp"

namespace mucc::testing {

inline SystemParams default_params(std::uint64_t seed = 1) {
    SystemParams p;
    p.rng_seed = seed;
    return p;
}

inline UeProfile make_ue(int id, double task_bits, int quota = 2) {
    UeProfile u;
    u.id = id;
    u.task_bits = task_bits;
    u.quota = quota;
    u.x_m = 1.0 + id;
    u.y_m = 1.0;
    return u;
}

// Scenario with explicit task sizes and a constant off-diagonal gain.
inline Scenario uniform_gain_scenario(const std::vector<double>& task_bits, double gain,
                                      const SystemParams& params = default_params()) {
    Scenario sc;
    sc.params = params;
    const int n = static_cast<int>(task_bits.size());
    sc.channels = ChannelGains(n);
    for (int i = 0; i < n; ++i) {
        UeProfile u = make_ue(i, task_bits[static_cast<std::size_t>(i)]);
        u.x_m = params.area_side_m * (i + 1.0) / (n + 1.0);
        u.y_m = params.area_side_m / 2.0;
        sc.ues.push_back(u);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) sc.channels.set(i, j, gain);
    return sc;
}

// Scenario with a hand-set symmetric gain matrix (entries above the
// diagonal; the rest mirrored).
inline Scenario explicit_gain_scenario(const std::vector<double>& task_bits,
                                       const std::vector<std::vector<double>>& gains,
                                       const SystemParams& params = default_params()) {
    Scenario sc = uniform_gain_scenario(task_bits, 1e-6, params);
    const int n = sc.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            sc.channels.set(i, j, gains[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    return sc;
}

// Dense brute-force scan of the pair objective; the reference for the
// golden-section solver.
struct PairGridResult {
    double best_load = 0.0;
    double best_saving = 0.0;
};

inline PairGridResult pair_grid_scan(const UeProfile& rd, const UeProfile& rp, double gain,
                                     const SystemParams& params, int points) {
    const double cap = max_feasible_load(gain, rd.max_tx_power_w, rd.task_bits, params);
    const double baseline = standalone_energy(rd, params.slot_seconds) +
                            standalone_energy(rp, params.slot_seconds);
    PairGridResult best;
    for (int i = 0; i <= points; ++i) {
        const double l = cap * i / points;
        const double local = dvfs_energy(rd.cap_coeff, rd.cycles_per_bit, rd.task_bits - l,
                                         params.slot_seconds);
        const double uplink = single_link_tx_power(l, gain, params) * params.slot_seconds;
        const double provider = dvfs_energy(rp.cap_coeff, rp.cycles_per_bit,
                                            rp.task_bits + l, params.slot_seconds);
        const double saving = baseline - (local + uplink + provider);
        if (saving > best.best_saving) {
            best.best_saving = saving;
            best.best_load = l;
        }
    }
    return best;
}

// Hand-built association preference tables for the matching and rotation
// tests. UE ids: demanders first, then providers.
struct AssociationFixture {
    AssociationPrefs prefs;
    std::vector<int> quotas;
    int n = 0;
};

inline AssociationFixture make_association_fixture(
    int n, const std::vector<int>& rd_ids, const std::vector<int>& rp_ids,
    const std::vector<std::pair<int, std::vector<int>>>& rd_rankings,
    const std::vector<std::pair<int, std::vector<int>>>& rp_rankings,
    const std::vector<std::pair<int, int>>& quota_overrides = {}) {
    AssociationFixture f;
    f.n = n;
    f.prefs.rd_ids = rd_ids;
    f.prefs.rp_ids = rp_ids;
    f.prefs.rd_lists.resize(static_cast<std::size_t>(n));
    f.prefs.rp_lists.resize(static_cast<std::size_t>(n));
    for (const auto& [owner, ranked] : rd_rankings) {
        f.prefs.rd_lists[static_cast<std::size_t>(owner)].owner = owner;
        f.prefs.rd_lists[static_cast<std::size_t>(owner)].ranked = ranked;
    }
    for (const auto& [owner, ranked] : rp_rankings) {
        f.prefs.rp_lists[static_cast<std::size_t>(owner)].owner = owner;
        f.prefs.rp_lists[static_cast<std::size_t>(owner)].ranked = ranked;
    }
    f.quotas.assign(static_cast<std::size_t>(n), 1);
    for (const auto& [id, q] : quota_overrides) f.quotas[static_cast<std::size_t>(id)] = q;
    return f;
}

}  // namespace mucc::testing
