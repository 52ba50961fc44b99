#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mucc/matching.hpp"

namespace mucc {

// Cyclically ordered demanders in which each member strictly prefers its
// predecessor's provider to its own (indices wrap). The unit of improvement
// for the rotation swap.
struct Cabal {
    std::vector<int> members;
};

// Directed envy relation over demanders: edge y -> x when x strictly prefers
// y's provider to its own situation. Cabals are exactly the directed cycles.
struct EnvyGraph {
    std::vector<int> nodes;                 // demander ids, ascending
    std::vector<std::vector<int>> out;      // by UE id; targets ascending
};

namespace detail {

// Rank of a provider in a demander's true list; unmatched compares worst.
inline bool envies(const AssociationPrefs& prefs, const Association& assoc,
                   int demander, int other_rp) {
    const PreferenceList& pl = prefs.rd_lists[static_cast<std::size_t>(demander)];
    const int r_other = pl.rank_of(other_rp);
    if (r_other < 0) return false;
    const int own = assoc.rp_of[static_cast<std::size_t>(demander)];
    if (own == -1) return true;
    const int r_own = pl.rank_of(own);
    require(r_own >= 0, "associated provider must be listed");
    return r_other < r_own;
}

}  // namespace detail

inline EnvyGraph envy_graph(const Association& assoc, const AssociationPrefs& prefs) {
    EnvyGraph g;
    g.nodes = prefs.rd_ids;
    g.out.resize(assoc.rp_of.size());
    for (int y : g.nodes) {
        const int rp_y = assoc.rp_of[static_cast<std::size_t>(y)];
        if (rp_y == -1) continue;  // nothing to envy
        for (int x : g.nodes) {
            if (x == y) continue;
            if (detail::envies(prefs, assoc, x, rp_y))
                g.out[static_cast<std::size_t>(y)].push_back(x);
        }
    }
    return g;
}

// Depth-first search from the lowest demander id; the first back edge closes
// the cycle formed by the vertices currently on the stack, which is returned
// in rotation order (each member envies its predecessor's provider).
inline std::optional<Cabal> find_cabal(const EnvyGraph& g) {
    enum : char { kWhite = 0, kOnStack = 1, kDone = 2 };
    std::vector<char> color(g.out.size(), kWhite);
    std::vector<int> stack;

    std::function<std::optional<Cabal>(int)> visit = [&](int u) -> std::optional<Cabal> {
        color[static_cast<std::size_t>(u)] = kOnStack;
        stack.push_back(u);
        for (int v : g.out[static_cast<std::size_t>(u)]) {
            if (color[static_cast<std::size_t>(v)] == kOnStack) {
                Cabal c;
                auto it = std::find(stack.begin(), stack.end(), v);
                c.members.assign(it, stack.end());
                return c;
            }
            if (color[static_cast<std::size_t>(v)] == kWhite) {
                if (auto c = visit(v)) return c;
            }
        }
        stack.pop_back();
        color[static_cast<std::size_t>(u)] = kDone;
        return std::nullopt;
    };

    for (int start : g.nodes)
        if (color[static_cast<std::size_t>(start)] == kWhite)
            if (auto c = visit(start)) return c;
    return std::nullopt;
}

namespace detail {

inline int cabal_pos(const Cabal& c, int id) {
    for (std::size_t i = 0; i < c.members.size(); ++i)
        if (c.members[i] == id) return static_cast<int>(i);
    return -1;
}

// After the rotation each cabal provider keeps its roster except that the
// member it hosted is replaced by that member's cyclic successor.
inline int incoming_member(const Cabal& c, std::size_t x) {
    return c.members[(x + 1) % c.members.size()];
}

inline int rp_at(const Association& assoc, int rd) {
    return assoc.rp_of[static_cast<std::size_t>(rd)];
}

}  // namespace detail

// Demanders whose submitted lists could block the cabal's rotation: outsiders
// that covet a cabal provider which would take them over its incoming member,
// and cabal members coveting a cabal provider other than their own target.
inline std::vector<int> find_accomplices(const Cabal& cabal, const Association& assoc,
                                         const AssociationPrefs& prefs) {
    std::vector<int> out;
    const std::size_t K = cabal.members.size();

    auto rp_prefers = [&](int rp, int a, int b) {
        const PreferenceList& pl = prefs.rp_lists[static_cast<std::size_t>(rp)];
        const int ra = pl.rank_of(a);
        if (ra < 0) return false;
        const int rb = pl.rank_of(b);
        return rb < 0 || ra < rb;
    };

    for (int h : prefs.rd_ids) {
        const int pos = detail::cabal_pos(cabal, h);
        bool interferes = false;
        if (pos < 0) {
            for (std::size_t x = 0; x < K && !interferes; ++x) {
                const int rp_x = detail::rp_at(assoc, cabal.members[x]);
                if (!detail::envies(prefs, assoc, h, rp_x)) continue;
                // Either form of provider-side interference marks h: beating
                // the current member or beating the rotation's incoming one.
                if (rp_prefers(rp_x, h, cabal.members[x]) ||
                    rp_prefers(rp_x, h, detail::incoming_member(cabal, x)))
                    interferes = true;
            }
        } else {
            const std::size_t l = static_cast<std::size_t>(pos);
            const int target = detail::rp_at(assoc, cabal.members[(l + K - 1) % K]);
            const PreferenceList& pl = prefs.rd_lists[static_cast<std::size_t>(h)];
            const int r_target = pl.rank_of(target);
            for (std::size_t x = 0; x < K && !interferes; ++x) {
                if (x == l) continue;
                const int rp_x = detail::rp_at(assoc, cabal.members[x]);
                if (rp_x == target) continue;
                const int r_other = pl.rank_of(rp_x);
                if (r_other < 0 || (r_target >= 0 && r_other >= r_target)) continue;
                if (rp_prefers(rp_x, h, detail::incoming_member(cabal, x)))
                    interferes = true;
            }
        }
        if (interferes) out.push_back(h);
    }
    return out;
}

// Falsified demander lists plus the true ones they were derived from.
struct FalsifiedLists {
    std::vector<PreferenceList> rd_lists;       // by UE id
    std::vector<PreferenceList> true_rd_lists;  // by UE id
};

namespace detail {

// Rebuild one list around a chosen anchor: candidates above the anchor keep
// their true order minus the demoted set; everything demoted lands after the
// anchor, again in true order. The result is a permutation of the original
// candidates.
inline PreferenceList reanchor_list(const PreferenceList& truth, int anchor,
                                    const std::vector<int>& demote) {
    auto demoted = [&](int c) {
        return std::find(demote.begin(), demote.end(), c) != demote.end();
    };
    PreferenceList out;
    out.owner = truth.owner;
    if (anchor == -1) {
        // Unmatched owner: no anchor; demoted providers sink to the tail.
        for (int c : truth.ranked)
            if (!demoted(c)) out.ranked.push_back(c);
        for (int c : truth.ranked)
            if (demoted(c)) out.ranked.push_back(c);
        return out;
    }
    const int anchor_rank = truth.rank_of(anchor);
    require(anchor_rank >= 0, "anchor must be present in the true list");
    std::vector<int> tail;
    for (int c : truth.ranked) {
        if (c == anchor) continue;
        if (truth.rank_of(c) < anchor_rank && !demoted(c))
            out.ranked.push_back(c);
        else
            tail.push_back(c);
    }
    out.ranked.push_back(anchor);
    out.ranked.insert(out.ranked.end(), tail.begin(), tail.end());
    return out;
}

}  // namespace detail

// Build the submitted lists for the rotation: each cabal member re-anchors on
// its predecessor's provider; non-cabal accomplices keep their own anchor but
// demote every cabal provider they could steal from its incoming member.
inline FalsifiedLists falsify(const AssociationPrefs& prefs, const Cabal& cabal,
                              const std::vector<int>& accomplices,
                              const Association& assoc) {
    FalsifiedLists out;
    out.true_rd_lists = prefs.rd_lists;
    out.rd_lists = prefs.rd_lists;
    const std::size_t K = cabal.members.size();

    auto rp_prefers = [&](int rp, int a, int b) {
        const PreferenceList& pl = prefs.rp_lists[static_cast<std::size_t>(rp)];
        const int ra = pl.rank_of(a);
        if (ra < 0) return false;
        const int rb = pl.rank_of(b);
        return rb < 0 || ra < rb;
    };
    auto above = [&](const PreferenceList& pl, int c, int threshold_rank) {
        const int r = pl.rank_of(c);
        return r >= 0 && (threshold_rank < 0 || r < threshold_rank);
    };

    for (std::size_t l = 0; l < K; ++l) {
        const int i = cabal.members[l];
        const int own_rp = detail::rp_at(assoc, i);
        const int target = detail::rp_at(assoc, cabal.members[(l + K - 1) % K]);
        const PreferenceList& truth = prefs.rd_lists[static_cast<std::size_t>(i)];
        const int target_rank = truth.rank_of(target);
        std::vector<int> demote;
        demote.push_back(own_rp);  // never re-proposes to the slot it vacates
        for (std::size_t x = 0; x < K; ++x) {
            const int rp_x = detail::rp_at(assoc, cabal.members[x]);
            if (rp_x == target || rp_x == own_rp) continue;
            if (above(truth, rp_x, target_rank) &&
                rp_prefers(rp_x, i, detail::incoming_member(cabal, x)))
                demote.push_back(rp_x);
        }
        out.rd_lists[static_cast<std::size_t>(i)] =
            detail::reanchor_list(truth, target, demote);
    }

    for (int h : accomplices) {
        if (detail::cabal_pos(cabal, h) >= 0) continue;  // cabal form already applied
        const int anchor = detail::rp_at(assoc, h);
        const PreferenceList& truth = prefs.rd_lists[static_cast<std::size_t>(h)];
        const int anchor_rank = anchor == -1 ? -1 : truth.rank_of(anchor);
        std::vector<int> demote;
        for (std::size_t x = 0; x < K; ++x) {
            const int rp_x = detail::rp_at(assoc, cabal.members[x]);
            if (rp_x == anchor) continue;
            if (above(truth, rp_x, anchor_rank) &&
                rp_prefers(rp_x, h, detail::incoming_member(cabal, x)))
                demote.push_back(rp_x);
        }
        if (!demote.empty())
            out.rd_lists[static_cast<std::size_t>(h)] =
                detail::reanchor_list(truth, anchor, demote);
    }

    // The falsified lists must remain permutations of the true candidate sets.
    for (int i : prefs.rd_ids) {
        std::vector<int> a = out.rd_lists[static_cast<std::size_t>(i)].ranked;
        std::vector<int> b = out.true_rd_lists[static_cast<std::size_t>(i)].ranked;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        require(a == b, "falsified list is not a permutation of the true list");
    }
    return out;
}

struct RsoRound {
    Cabal cabal;
    std::vector<int> accomplices;
    Association candidate{0};
    bool accepted = false;
    std::string note;
};

struct RsoResult {
    Association association{0};
    std::vector<RsoRound> rounds;
    bool cabal_free = false;   // no cabal remained when the loop stopped
    bool truncated = false;    // stopped with a cabal still present
};

// Acceptance hook evaluated on top of the built-in demander guard; the
// pipeline uses it to require that re-optimized system energy not increase.
using RoundFilter = std::function<bool(const Association& current, const Association& candidate)>;

// Rotation-swap loop: find a cabal, falsify, re-run deferred acceptance, and
// adopt the result only when no demander ends up strictly worse under its
// true list. A rejected or ineffective round is a fixed point, so the loop
// stops there rather than spinning to the round cap.
inline RsoResult rso_loop(const AssociationPrefs& prefs, const std::vector<int>& quotas,
                          const Association& initial, int max_rounds = 50,
                          const RoundFilter& extra_accept = {}) {
    RsoResult res;
    res.association = initial;

    auto no_demander_worse = [&](const Association& before, const Association& after) {
        for (int i : prefs.rd_ids) {
            const PreferenceList& pl = prefs.rd_lists[static_cast<std::size_t>(i)];
            const int rp_new = after.rp_of[static_cast<std::size_t>(i)];
            const int rp_old = before.rp_of[static_cast<std::size_t>(i)];
            if (rp_old == rp_new) continue;
            if (rp_new == -1) return false;  // lost its provider
            if (rp_old == -1) continue;      // gained one
            if (pl.rank_of(rp_new) > pl.rank_of(rp_old)) return false;
        }
        return true;
    };

    for (int round = 0; round < max_rounds; ++round) {
        const EnvyGraph g = envy_graph(res.association, prefs);
        const std::optional<Cabal> cabal = find_cabal(g);
        if (!cabal) {
            res.cabal_free = true;
            return res;
        }
        RsoRound log;
        log.cabal = *cabal;
        log.accomplices = find_accomplices(*cabal, res.association, prefs);
        FalsifiedLists fl = falsify(prefs, *cabal, log.accomplices, res.association);

        AssociationPrefs submitted = prefs;
        submitted.rd_lists = fl.rd_lists;
        log.candidate = gale_shapley(submitted, quotas);

        bool accept = no_demander_worse(res.association, log.candidate);
        if (accept && log.candidate == res.association) {
            accept = false;
            log.note = "rotation not realized";
        } else if (accept && extra_accept && !extra_accept(res.association, log.candidate)) {
            accept = false;
            log.note = "rejected by acceptance filter";
        } else if (!accept) {
            log.note = "a demander would be worse off";
        }
        log.accepted = accept;
        const bool stop = !accept;
        if (accept) res.association = log.candidate;
        res.rounds.push_back(std::move(log));
        if (stop) {
            res.truncated = true;  // a cabal remains but no progress is possible
            return res;
        }
    }
    res.truncated = !find_cabal(envy_graph(res.association, prefs)) ? false : true;
    res.cabal_free = !res.truncated;
    return res;
}

}  // namespace mucc
