#include <catch2/catch.hpp>

#include "mucc/rso.hpp"
#include "support.hpp"

using namespace mucc;
using namespace mucc::testing;

namespace {

// Two demanders whose providers should rotate, plus an outside demander
// that would steal provider 4 from the incoming member unless its list is
// falsified. Quotas are 1.
AssociationFixture two_cycle_fixture() {
    return make_association_fixture(
        6, {0, 1, 2}, {3, 4, 5},
        {{0, {4, 3}}, {1, {3, 4}}, {2, {4, 5}}},
        {{3, {0, 1}}, {4, {1, 2, 0}}, {5, {2}}});
}

// Three-cycle rotation. Demander 3 is an outside accomplice for provider 6;
// demander 2 is a within-cabal accomplice because it covets provider 4,
// which ranks it above the rotation's incoming member.
AssociationFixture three_cycle_fixture() {
    return make_association_fixture(
        8, {0, 1, 2, 3}, {4, 5, 6, 7},
        {{0, {6, 4}}, {1, {4, 5}}, {2, {4, 5, 6}}, {3, {6, 7}}},
        {{4, {0, 2, 1}}, {5, {1, 2}}, {6, {2, 3, 0}}, {7, {3}}});
}

}  // namespace

TEST_CASE("envy graph edges follow strict preference for another's provider") {
    AssociationFixture f = two_cycle_fixture();
    const Association m = gale_shapley(f.prefs, f.quotas);
    REQUIRE(m.rp_of[0] == 3);
    REQUIRE(m.rp_of[1] == 4);
    REQUIRE(m.rp_of[2] == 5);

    const EnvyGraph g = envy_graph(m, f.prefs);
    CHECK(g.out[0] == std::vector<int>{1});      // 1 envies 0's provider
    CHECK(g.out[1] == std::vector<int>{0, 2});   // 0 and 2 envy 1's provider
    CHECK(g.out[2].empty());
    for (int v : g.nodes)
        for (int w : g.out[static_cast<std::size_t>(v)]) CHECK(w != v);  // no self-envy
}

TEST_CASE("an envy-free matching has an empty envy graph") {
    AssociationFixture f = make_association_fixture(
        4, {0, 1}, {2, 3},
        {{0, {2, 3}}, {1, {3, 2}}},
        {{2, {0, 1}}, {3, {1, 0}}});
    const Association m = gale_shapley(f.prefs, f.quotas);
    const EnvyGraph g = envy_graph(m, f.prefs);
    for (int v : g.nodes) CHECK(g.out[static_cast<std::size_t>(v)].empty());
    CHECK(!find_cabal(g).has_value());
}

TEST_CASE("cycle detection returns the first cycle in id order") {
    SECTION("acyclic graph has no cabal") {
        EnvyGraph g;
        g.nodes = {0, 1, 2};
        g.out.resize(3);
        g.out[0] = {1};
        g.out[1] = {2};
        CHECK(!find_cabal(g).has_value());
    }
    SECTION("two disjoint cycles: the one reachable from the lowest id wins") {
        EnvyGraph g;
        g.nodes = {0, 1, 2, 3};
        g.out.resize(4);
        g.out[0] = {1};
        g.out[1] = {0};
        g.out[2] = {3};
        g.out[3] = {2};
        const auto cabal = find_cabal(g);
        REQUIRE(cabal.has_value());
        CHECK(cabal->members == std::vector<int>{0, 1});
    }
    SECTION("a tail leading into a cycle yields just the cycle") {
        EnvyGraph g;
        g.nodes = {0, 1, 2};
        g.out.resize(3);
        g.out[0] = {1};
        g.out[1] = {2};
        g.out[2] = {1};
        const auto cabal = find_cabal(g);
        REQUIRE(cabal.has_value());
        CHECK(cabal->members == std::vector<int>{1, 2});
    }
}

TEST_CASE("the detected cabal satisfies the rotation predicate") {
    AssociationFixture f = three_cycle_fixture();
    const Association m = gale_shapley(f.prefs, f.quotas);
    REQUIRE(m.rp_of[0] == 4);
    REQUIRE(m.rp_of[1] == 5);
    REQUIRE(m.rp_of[2] == 6);
    REQUIRE(m.rp_of[3] == 7);

    const auto cabal = find_cabal(envy_graph(m, f.prefs));
    REQUIRE(cabal.has_value());
    REQUIRE(cabal->members == std::vector<int>{0, 1, 2});
    // Each member strictly prefers its predecessor's provider.
    const std::size_t K = cabal->members.size();
    for (std::size_t x = 0; x < K; ++x) {
        const int me = cabal->members[x];
        const int pred = cabal->members[(x + K - 1) % K];
        const PreferenceList& pl = f.prefs.rd_lists[static_cast<std::size_t>(me)];
        CHECK(pl.rank_of(m.rp_of[static_cast<std::size_t>(pred)]) <
              pl.rank_of(m.rp_of[static_cast<std::size_t>(me)]));
    }
}

TEST_CASE("accomplice detection covers outsiders and cabal members") {
    SECTION("no interference leaves only the cabal") {
        // Crossed matching built directly: with just two demanders deferred
        // acceptance would hand each its top, so the envy cycle is staged.
        AssociationFixture f = make_association_fixture(
            4, {0, 1}, {2, 3},
            {{0, {3, 2}}, {1, {2, 3}}},
            {{2, {0, 1}}, {3, {1, 0}}});
        Association m(4);
        m.link(0, 2);
        m.link(1, 3);
        const auto cabal = find_cabal(envy_graph(m, f.prefs));
        REQUIRE(cabal.has_value());
        CHECK(find_accomplices(*cabal, m, f.prefs).empty());
    }
    SECTION("an interfering outside demander is flagged") {
        AssociationFixture f = two_cycle_fixture();
        const Association m = gale_shapley(f.prefs, f.quotas);
        const auto cabal = find_cabal(envy_graph(m, f.prefs));
        REQUIRE(cabal.has_value());
        CHECK(find_accomplices(*cabal, m, f.prefs) == std::vector<int>{2});
    }
    SECTION("a cabal member coveting a non-adjacent cabal provider is flagged") {
        AssociationFixture f = three_cycle_fixture();
        const Association m = gale_shapley(f.prefs, f.quotas);
        const auto cabal = find_cabal(envy_graph(m, f.prefs));
        REQUIRE(cabal.has_value());
        const std::vector<int> acc = find_accomplices(*cabal, m, f.prefs);
        CHECK(acc == std::vector<int>{2, 3});  // member 2 plus outsider 3
    }
}

TEST_CASE("falsified lists stay permutations and demote interference") {
    AssociationFixture f = two_cycle_fixture();
    const Association m = gale_shapley(f.prefs, f.quotas);
    const auto cabal = find_cabal(envy_graph(m, f.prefs));
    REQUIRE(cabal.has_value());
    const std::vector<int> acc = find_accomplices(*cabal, m, f.prefs);
    const FalsifiedLists fl = falsify(f.prefs, *cabal, acc, m);
    // Outside accomplice 2 pushes provider 4 behind its own provider 5.
    CHECK(fl.rd_lists[2].ranked == std::vector<int>{5, 4});
    // Cabal members re-anchor on their rotation targets.
    CHECK(fl.rd_lists[0].ranked.front() == 4);
    CHECK(fl.rd_lists[1].ranked.front() == 3);
}

TEST_CASE("a pure two-cycle simply exchanges anchors") {
    AssociationFixture f = make_association_fixture(
        4, {0, 1}, {2, 3},
        {{0, {3, 2}}, {1, {2, 3}}},
        {{2, {0, 1}}, {3, {1, 0}}});
    Association m(4);  // staged crossed matching, as above
    m.link(0, 2);
    m.link(1, 3);
    const auto cabal = find_cabal(envy_graph(m, f.prefs));
    REQUIRE(cabal.has_value());
    const FalsifiedLists fl = falsify(f.prefs, *cabal, {}, m);
    CHECK(fl.rd_lists[0].ranked.front() == 3);
    CHECK(fl.rd_lists[1].ranked.front() == 2);

    RsoResult res = rso_loop(f.prefs, f.quotas, m);
    CHECK(res.cabal_free);
    CHECK(res.association.rp_of[0] == 3);
    CHECK(res.association.rp_of[1] == 2);
}

TEST_CASE("segment permutation with no demotions reproduces the matching") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        // Random association instance: random listing pattern and rankings.
        const int n_rd = 2 + static_cast<int>(uniform_index(rng, 5));
        const int n_rp = 2 + static_cast<int>(uniform_index(rng, 4));
        const int n = n_rd + n_rp;
        std::vector<int> rd_ids, rp_ids;
        for (int i = 0; i < n_rd; ++i) rd_ids.push_back(i);
        for (int j = 0; j < n_rp; ++j) rp_ids.push_back(n_rd + j);
        AssociationFixture f;
        f.n = n;
        f.prefs.rd_ids = rd_ids;
        f.prefs.rp_ids = rp_ids;
        f.prefs.rd_lists.resize(static_cast<std::size_t>(n));
        f.prefs.rp_lists.resize(static_cast<std::size_t>(n));
        for (int i : rd_ids) {
            std::vector<int> cands;
            for (int j : rp_ids)
                if (uniform_open(rng) < 0.7) cands.push_back(j);
            shuffle_deterministic(cands, rng);
            f.prefs.rd_lists[static_cast<std::size_t>(i)].owner = i;
            f.prefs.rd_lists[static_cast<std::size_t>(i)].ranked = cands;
        }
        for (int j : rp_ids) {
            std::vector<int> cands;
            for (int i : rd_ids)
                if (uniform_open(rng) < 0.8) cands.push_back(i);
            shuffle_deterministic(cands, rng);
            f.prefs.rp_lists[static_cast<std::size_t>(j)].owner = j;
            f.prefs.rp_lists[static_cast<std::size_t>(j)].ranked = cands;
        }
        f.quotas.assign(static_cast<std::size_t>(n), 1);
        for (int j : rp_ids)
            f.quotas[static_cast<std::size_t>(j)] = 1 + static_cast<int>(uniform_index(rng, 2));

        const Association m = gale_shapley(f.prefs, f.quotas);

        // Permute the segments on each side of every matched demander's
        // anchor; keep unmatched lists as they are.
        AssociationPrefs permuted = f.prefs;
        for (int i : rd_ids) {
            const int anchor = m.rp_of[static_cast<std::size_t>(i)];
            if (anchor == -1) continue;
            PreferenceList& pl = permuted.rd_lists[static_cast<std::size_t>(i)];
            const int a_rank = pl.rank_of(anchor);
            std::vector<int> left(pl.ranked.begin(), pl.ranked.begin() + a_rank);
            std::vector<int> right(pl.ranked.begin() + a_rank + 1, pl.ranked.end());
            shuffle_deterministic(left, rng);
            shuffle_deterministic(right, rng);
            pl.ranked.clear();
            pl.ranked.insert(pl.ranked.end(), left.begin(), left.end());
            pl.ranked.push_back(anchor);
            pl.ranked.insert(pl.ranked.end(), right.begin(), right.end());
        }
        const Association m2 = gale_shapley(permuted, f.quotas);
        CHECK(m2 == m);
    }
}

TEST_CASE("rotation loop on the two-cycle instance") {
    AssociationFixture f = two_cycle_fixture();
    const Association m = gale_shapley(f.prefs, f.quotas);
    RsoResult res = rso_loop(f.prefs, f.quotas, m);
    REQUIRE(res.rounds.size() == 1);
    CHECK(res.rounds[0].accepted);
    CHECK(res.cabal_free);
    CHECK(!res.truncated);
    // Rotation realized: 0 and 1 exchanged providers, 2 kept its own.
    CHECK(res.association.rp_of[0] == 4);
    CHECK(res.association.rp_of[1] == 3);
    CHECK(res.association.rp_of[2] == 5);
}

TEST_CASE("rotation loop on the three-cycle instance improves every member") {
    AssociationFixture f = three_cycle_fixture();
    const Association before = gale_shapley(f.prefs, f.quotas);
    RsoResult res = rso_loop(f.prefs, f.quotas, before);
    REQUIRE(!res.rounds.empty());
    CHECK(res.rounds[0].accepted);
    CHECK(res.cabal_free);
    // Every cabal member holds its predecessor's provider.
    CHECK(res.association.rp_of[0] == 6);
    CHECK(res.association.rp_of[1] == 4);
    CHECK(res.association.rp_of[2] == 5);
    CHECK(res.association.rp_of[3] == 7);
    // Weak improvement under the true lists for every demander.
    for (int i : f.prefs.rd_ids) {
        const PreferenceList& pl = f.prefs.rd_lists[static_cast<std::size_t>(i)];
        const int before_rp = before.rp_of[static_cast<std::size_t>(i)];
        const int after_rp = res.association.rp_of[static_cast<std::size_t>(i)];
        REQUIRE(after_rp != -1);
        CHECK(pl.rank_of(after_rp) <= pl.rank_of(before_rp));
    }
    // Cabal members improve strictly.
    for (int i : {0, 1, 2}) {
        const PreferenceList& pl = f.prefs.rd_lists[static_cast<std::size_t>(i)];
        CHECK(pl.rank_of(res.association.rp_of[static_cast<std::size_t>(i)]) <
              pl.rank_of(before.rp_of[static_cast<std::size_t>(i)]));
    }
}

TEST_CASE("a cabal-free matching passes through untouched") {
    AssociationFixture f = make_association_fixture(
        4, {0, 1}, {2, 3},
        {{0, {2, 3}}, {1, {3, 2}}},
        {{2, {0, 1}}, {3, {1, 0}}});
    const Association m = gale_shapley(f.prefs, f.quotas);
    RsoResult res = rso_loop(f.prefs, f.quotas, m);
    CHECK(res.rounds.empty());
    CHECK(res.cabal_free);
    CHECK(res.association == m);
}

TEST_CASE("the acceptance filter can veto a rotation") {
    AssociationFixture f = two_cycle_fixture();
    const Association m = gale_shapley(f.prefs, f.quotas);
    RoundFilter veto = [](const Association&, const Association&) { return false; };
    RsoResult res = rso_loop(f.prefs, f.quotas, m, 50, veto);
    REQUIRE(res.rounds.size() == 1);
    CHECK(!res.rounds[0].accepted);
    CHECK(res.truncated);
    CHECK(res.association == m);
}

TEST_CASE("quota and single-provider constraints survive rotation rounds") {
    AssociationFixture f = three_cycle_fixture();
    // widen one provider's quota to mix group sizes
    f.quotas[4] = 2;
    const Association m = gale_shapley(f.prefs, f.quotas);
    RsoResult res = rso_loop(f.prefs, f.quotas, m);
    std::vector<int> count(static_cast<std::size_t>(f.n), 0);
    for (int i : f.prefs.rd_ids) {
        const int rp = res.association.rp_of[static_cast<std::size_t>(i)];
        if (rp != -1) count[static_cast<std::size_t>(rp)] += 1;
    }
    for (int j : f.prefs.rp_ids)
        CHECK(count[static_cast<std::size_t>(j)] <=
              f.quotas[static_cast<std::size_t>(j)]);
}
