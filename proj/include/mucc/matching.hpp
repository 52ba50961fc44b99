#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mucc/pairwise.hpp"

namespace mucc {

struct RoommatePair {
    int rd = -1;
    int rp = -1;
};

// Disjoint role sets covering all UEs, plus the matched pairs that produced
// the demander/provider split.
struct RolePartition {
    std::vector<int> rds;
    std::vector<int> rps;
    std::vector<int> sus;
    std::vector<RoommatePair> roommate_pairs;

    void validate(int n) const {
        std::vector<int> seen(static_cast<std::size_t>(n), 0);
        for (int id : rds) ++seen[static_cast<std::size_t>(id)];
        for (int id : rps) ++seen[static_cast<std::size_t>(id)];
        for (int id : sus) ++seen[static_cast<std::size_t>(id)];
        for (int m = 0; m < n; ++m)
            require(seen[static_cast<std::size_t>(m)] == 1,
                    "role sets must partition the UE set");
        for (const RoommatePair& p : roommate_pairs) {
            require(std::find(rds.begin(), rds.end(), p.rd) != rds.end(),
                    "pair demander not in demander set");
            require(std::find(rps.begin(), rps.end(), p.rp) != rps.end(),
                    "pair provider not in provider set");
        }
    }
};

// Many-to-one association from providers to the demanders they serve.
struct Association {
    std::vector<int> rp_of;                 // by UE id; -1 = not associated
    std::vector<std::vector<int>> members_of;  // by UE id; sorted ascending

    explicit Association(int n = 0)
        : rp_of(static_cast<std::size_t>(n), -1),
          members_of(static_cast<std::size_t>(n)) {}

    int size() const { return static_cast<int>(rp_of.size()); }

    void link(int rd, int rp) {
        rp_of[static_cast<std::size_t>(rd)] = rp;
        auto& ms = members_of[static_cast<std::size_t>(rp)];
        ms.insert(std::upper_bound(ms.begin(), ms.end(), rd), rd);
    }

    friend bool operator==(const Association& a, const Association& b) {
        return a.rp_of == b.rp_of;
    }
};

// Battery gate for the provider role: a UE may serve others only while its
// remaining energy clears its own threshold.
inline std::vector<int> role_control(const Scenario& sc) {
    std::vector<int> eligible;
    for (int m = 0; m < sc.size(); ++m)
        if (sc.ue(m).available_energy_j >= sc.ue(m).energy_threshold_j)
            eligible.push_back(m);
    return eligible;
}

// One-to-one roommate proposal rounds over the benefit rankings. Free UEs
// propose in ascending id order; a proposee holding a worse proposal swaps
// and releases the previous proposer, which resumes further down its list.
// Holding a proposal does not stop a UE from proposing, so for the shared
// (symmetric) benefit rankings the terminal holds pair up mutually. UEs
// whose lists run out stay standalone. Matched pairs take the
// demander/provider orientation stored with the pair's benefit.
inline RolePartition assign_roles(const RoommatePrefs& prefs) {
    const int n = prefs.n;
    std::vector<int> held(static_cast<std::size_t>(n), -1);  // proposer whose offer is held
    std::vector<std::size_t> next(static_cast<std::size_t>(n), 0);
    std::set<int> free_proposers;
    for (int m = 0; m < n; ++m)
        if (!prefs.lists[static_cast<std::size_t>(m)].ranked.empty())
            free_proposers.insert(m);

    auto prefers = [&](int who, int a, int b) {
        // true if `who` strictly prefers a over b
        const PreferenceList& pl = prefs.lists[static_cast<std::size_t>(who)];
        const int ra = pl.rank_of(a), rb = pl.rank_of(b);
        require(ra >= 0 && rb >= 0, "comparing unlisted candidates");
        return ra < rb;
    };

    while (!free_proposers.empty()) {
        const int m = *free_proposers.begin();
        const PreferenceList& pl = prefs.lists[static_cast<std::size_t>(m)];
        if (next[static_cast<std::size_t>(m)] >= pl.ranked.size()) {
            free_proposers.erase(m);  // exhausted: standalone unless courted
            continue;
        }
        const int k = pl.ranked[next[static_cast<std::size_t>(m)]];
        const int holder = held[static_cast<std::size_t>(k)];
        if (holder == -1) {
            held[static_cast<std::size_t>(k)] = m;
            free_proposers.erase(m);
        } else if (prefers(k, m, holder)) {
            held[static_cast<std::size_t>(k)] = m;
            free_proposers.erase(m);
            next[static_cast<std::size_t>(holder)] += 1;  // k just rejected it
            free_proposers.insert(holder);
        } else {
            next[static_cast<std::size_t>(m)] += 1;
            // m stays free and tries its next candidate
        }
    }

    RolePartition part;
    for (int m = 0; m < n; ++m) {
        const int k = held[static_cast<std::size_t>(m)];
        if (k == -1) {
            part.sus.push_back(m);
            continue;
        }
        // With symmetric shared benefits the holds come out mutual; a
        // one-sided hold would break the matching and is a defect.
        require(held[static_cast<std::size_t>(k)] == m,
                "terminal proposal holds must be mutual");
        if (m < k) {
            const PairBenefit& b = prefs.pair(m, k);
            part.rds.push_back(b.rd);
            part.rps.push_back(b.rp);
            part.roommate_pairs.push_back({b.rd, b.rp});
        }
    }
    std::sort(part.rds.begin(), part.rds.end());
    std::sort(part.rps.begin(), part.rps.end());
    std::sort(part.roommate_pairs.begin(), part.roommate_pairs.end(),
              [](const RoommatePair& a, const RoommatePair& b) { return a.rd < b.rd; });
    part.validate(n);
    return part;
}

// Demander-proposing deferred acceptance with per-provider quotas. A full
// provider swaps out its least preferred member when a better demander
// proposes; proposals from unlisted demanders are rejected outright.
// Proposal order is ascending demander id, which fixes the outcome.
inline Association gale_shapley(const AssociationPrefs& prefs,
                                const std::vector<int>& quotas) {
    const int n = static_cast<int>(quotas.size());
    Association assoc(n);
    std::vector<std::size_t> next(static_cast<std::size_t>(n), 0);
    std::set<int> pending(prefs.rd_ids.begin(), prefs.rd_ids.end());

    while (!pending.empty()) {
        const int i = *pending.begin();
        const PreferenceList& pl = prefs.rd_lists[static_cast<std::size_t>(i)];
        if (next[static_cast<std::size_t>(i)] >= pl.ranked.size()) {
            pending.erase(i);  // rejected everywhere: stays unassociated
            continue;
        }
        const int j = pl.ranked[next[static_cast<std::size_t>(i)]];
        const PreferenceList& rp_list = prefs.rp_lists[static_cast<std::size_t>(j)];
        const int rank_i = rp_list.rank_of(i);
        if (rank_i < 0) {
            next[static_cast<std::size_t>(i)] += 1;
            continue;
        }
        auto& held = assoc.members_of[static_cast<std::size_t>(j)];
        if (static_cast<int>(held.size()) < quotas[static_cast<std::size_t>(j)]) {
            assoc.link(i, j);
            pending.erase(i);
            continue;
        }
        // Provider is full: find its least preferred current member.
        int worst = -1, worst_rank = -1;
        for (int m : held) {
            const int r = rp_list.rank_of(m);
            require(r >= 0, "provider holds an unlisted member");
            if (r > worst_rank) {
                worst_rank = r;
                worst = m;
            }
        }
        if (rank_i < worst_rank) {
            held.erase(std::find(held.begin(), held.end(), worst));
            assoc.rp_of[static_cast<std::size_t>(worst)] = -1;
            next[static_cast<std::size_t>(worst)] += 1;
            pending.insert(worst);
            assoc.link(i, j);
            pending.erase(i);
        } else {
            next[static_cast<std::size_t>(i)] += 1;
        }
    }
    return assoc;
}

// All unordered UE pairs where each side strictly prefers the other over its
// current roommate situation (being unmatched ranks below any listed
// candidate). Empty output certifies stability.
inline std::vector<std::pair<int, int>> find_roommate_blocking_pairs(
    const RolePartition& part, const RoommatePrefs& prefs) {
    const int n = prefs.n;
    std::vector<int> partner(static_cast<std::size_t>(n), -1);
    for (const RoommatePair& p : part.roommate_pairs) {
        partner[static_cast<std::size_t>(p.rd)] = p.rp;
        partner[static_cast<std::size_t>(p.rp)] = p.rd;
    }
    auto strictly_prefers = [&](int who, int candidate) {
        const PreferenceList& pl = prefs.lists[static_cast<std::size_t>(who)];
        const int rc = pl.rank_of(candidate);
        if (rc < 0) return false;
        const int cur = partner[static_cast<std::size_t>(who)];
        if (cur == -1) return true;
        const int rcur = pl.rank_of(cur);
        require(rcur >= 0, "partner must be listed");
        return rc < rcur;
    };
    std::vector<std::pair<int, int>> blocking;
    for (int m = 0; m < n; ++m)
        for (int k = m + 1; k < n; ++k)
            if (strictly_prefers(m, k) && strictly_prefers(k, m))
                blocking.emplace_back(m, k);
    return blocking;
}

// Demander/provider pairs that would defect from the given association:
// the demander strictly prefers the provider to its current one (or has
// none), and the provider either has spare quota or strictly prefers the
// demander to one of its members.
inline std::vector<std::pair<int, int>> find_admission_blocking_pairs(
    const Association& assoc, const AssociationPrefs& prefs,
    const std::vector<int>& quotas) {
    std::vector<std::pair<int, int>> blocking;
    for (int i : prefs.rd_ids) {
        const PreferenceList& pl = prefs.rd_lists[static_cast<std::size_t>(i)];
        const int cur = assoc.rp_of[static_cast<std::size_t>(i)];
        const int cur_rank = cur == -1 ? -1 : pl.rank_of(cur);
        for (int j : pl.ranked) {
            if (j == cur) break;  // reached the current provider: stop
            if (cur != -1 && cur_rank >= 0 && pl.rank_of(j) >= cur_rank) break;
            const PreferenceList& rp_list = prefs.rp_lists[static_cast<std::size_t>(j)];
            const int rank_i = rp_list.rank_of(i);
            if (rank_i < 0) continue;
            const auto& held = assoc.members_of[static_cast<std::size_t>(j)];
            bool provider_wants = false;
            if (static_cast<int>(held.size()) < quotas[static_cast<std::size_t>(j)]) {
                provider_wants = true;
            } else {
                for (int m : held)
                    if (rank_i < rp_list.rank_of(m)) provider_wants = true;
            }
            if (provider_wants) blocking.emplace_back(i, j);
        }
    }
    return blocking;
}

}  // namespace mucc
