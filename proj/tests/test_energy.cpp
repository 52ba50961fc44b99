#include <catch2/catch.hpp>

#include "mucc/energy.hpp"
#include "support.hpp"

using namespace mucc;
using namespace mucc::testing;

namespace {

GroupLoads one_member_group(int rp, int rd, double load) {
    GroupLoads g;
    g.rp = rp;
    g.members = {rd};
    g.loads = {load};
    return g;
}

}  // namespace

TEST_CASE("standalone energy golden value") {
    UeProfile u = make_ue(0, 1e6);
    // gamma = 1e-28 is not exactly representable in binary64, so the product
    // lands within 2 ulps of 0.3125 rather than exactly on it.
    const double e = standalone_energy(u, 0.2);
    CHECK(e == Approx(0.3125).epsilon(1e-14));

    u.task_bits = 0.0;
    CHECK(standalone_energy(u, 0.2) == 0.0);
}

TEST_CASE("standalone energy scales cubically in the task size") {
    UeProfile u = make_ue(0, 4e5);
    const double base = standalone_energy(u, 0.2);
    u.task_bits = 8e5;
    CHECK(standalone_energy(u, 0.2) == Approx(8.0 * base).epsilon(1e-12));
}

TEST_CASE("transmit power golden values") {
    const SystemParams params = default_params();
    Scenario sc = uniform_gain_scenario({1e6, 1e6}, 1e-6, params);

    SECTION("single member") {
        const GroupLoads g = one_member_group(1, 0, 2e5);
        CHECK(tx_power(g, 0, sc.channels, params) == 1e-3);  // bit-exact
    }
    SECTION("zero load sends zero power") {
        const GroupLoads g = one_member_group(1, 0, 0.0);
        CHECK(tx_power(g, 0, sc.channels, params) == 0.0);
    }
    SECTION("two members with equal loads") {
        Scenario sc3 = uniform_gain_scenario({1e6, 1e6, 1e6}, 1e-6, params);
        GroupLoads g;
        g.rp = 2;
        g.members = {0, 1};
        g.loads = {2e5, 2e5};
        CHECK(tx_power(g, 0, sc3.channels, params) == Approx(2e-3).epsilon(1e-14));
        CHECK(tx_power(g, 1, sc3.channels, params) == Approx(2e-3).epsilon(1e-14));
    }
}

TEST_CASE("both algebraic power forms agree") {
    const SystemParams params = default_params();
    Rng rng(2024);
    Scenario sc = uniform_gain_scenario({1e6, 1e6, 1e6, 1e6}, 1e-6, params);
    // Loads are whole-bit scale or exactly zero; the solvers never emit
    // sub-bit loads.
    auto draw_load = [&]() {
        return (rng() % 10 == 0) ? 0.0 : uniform_in(rng, 1.0, 1e6);
    };
    for (int trial = 0; trial < 10000; ++trial) {
        GroupLoads g;
        g.rp = 3;
        g.members = {0, 1, 2};
        g.loads = {draw_load(), draw_load(), draw_load()};
        for (std::size_t i = 0; i < 3; ++i) {
            const double a = tx_power(g, i, sc.channels, params);
            const double b = tx_power_difference_form(g, i, sc.channels, params);
            CHECK(close_rel(a, b, 1e-12));
        }
    }
}

TEST_CASE("transmit power is monotone in the loads") {
    const SystemParams params = default_params();
    Scenario sc = uniform_gain_scenario({1e6, 1e6, 1e6}, 1e-5, params);
    GroupLoads g;
    g.rp = 2;
    g.members = {0, 1};
    g.loads = {3e5, 2e5};
    const double base = tx_power(g, 0, sc.channels, params);
    GroupLoads more_own = g;
    more_own.loads[0] += 1e4;
    CHECK(tx_power(more_own, 0, sc.channels, params) > base);
    GroupLoads more_other = g;
    more_other.loads[1] += 1e4;
    CHECK(tx_power(more_other, 0, sc.channels, params) >= base);
    // With zero own load, raising the co-member's load leaves power at zero.
    GroupLoads zero_own = g;
    zero_own.loads[0] = 0.0;
    GroupLoads zero_own_b = zero_own;
    zero_own_b.loads[1] += 1e5;
    CHECK(tx_power(zero_own, 0, sc.channels, params) == 0.0);
    CHECK(tx_power(zero_own_b, 0, sc.channels, params) == 0.0);
}

TEST_CASE("transmit energy is the power-time product") {
    CHECK(tx_energy(1e-3, 0.2) == Approx(2e-4).epsilon(1e-15));
    CHECK(tx_energy(0.0, 0.2) == 0.0);
    CHECK(tx_energy(2e-3, 0.2) == Approx(4e-4).epsilon(1e-15));
}

TEST_CASE("provider energy covers its own and the accepted bits") {
    const SystemParams params = default_params();
    UeProfile rp = make_ue(1, 5e5);
    GroupLoads g = one_member_group(1, 0, 5e5);
    CHECK(rp_energy(rp, g, params.slot_seconds) == Approx(0.3125).epsilon(1e-12));
    GroupLoads idle = one_member_group(1, 0, 0.0);
    CHECK(rp_energy(rp, idle, params.slot_seconds) ==
          standalone_energy(rp, params.slot_seconds));
    // strictly increasing in any accepted load
    GroupLoads more = one_member_group(1, 0, 6e5);
    CHECK(rp_energy(rp, more, params.slot_seconds) > rp_energy(rp, g, params.slot_seconds));
}

TEST_CASE("demander local energy") {
    UeProfile rd = make_ue(0, 1e6);
    CHECK(rd_local_energy(rd, 1e6, 0.2) == 0.0);
    CHECK(rd_local_energy(rd, 0.0, 0.2) == standalone_energy(rd, 0.2));
    CHECK(rd_local_energy(rd, 5e5, 0.2) == Approx(0.0390625).epsilon(1e-12));
    CHECK_THROWS_AS(rd_local_energy(rd, 2e6, 0.2), std::invalid_argument);
}

TEST_CASE("demander total energy composes compute and uplink") {
    const SystemParams params = default_params();
    Scenario sc = uniform_gain_scenario({1e6, 1e6}, 1e-6, params);
    const GroupLoads g = one_member_group(1, 0, 2e5);
    const double total = rd_total_energy(sc.ue(0), g, 0, sc.channels, params);
    const double expected = rd_local_energy(sc.ue(0), 2e5, 0.2) +
                            tx_energy(tx_power(g, 0, sc.channels, params), 0.2);
    CHECK(total == expected);
    CHECK(total == Approx(0.1602).epsilon(1e-12));

    const GroupLoads none = one_member_group(1, 0, 0.0);
    CHECK(rd_total_energy(sc.ue(0), none, 0, sc.channels, params) ==
          standalone_energy(sc.ue(0), params.slot_seconds));
}

TEST_CASE("achieved rates meet the per-slot load requirement") {
    const SystemParams params = default_params();
    Scenario sc = uniform_gain_scenario({1e6, 1e6, 1e6}, 1e-6, params);

    SECTION("all zero loads give zero rate") {
        GroupLoads g;
        g.rp = 2;
        g.members = {0, 1};
        g.loads = {0.0, 0.0};
        CHECK(achievable_rate(g, 0, sc.channels, params) == 0.0);
    }
    SECTION("single member meets its load exactly") {
        const GroupLoads g = one_member_group(1, 0, 3.7e5);
        const double r = achievable_rate(g, 0, sc.channels, params);
        CHECK(close_rel(r * params.slot_seconds, 3.7e5, 1e-6));
    }
    SECTION("random feasible groups satisfy every member") {
        Rng rng(7);
        for (int trial = 0; trial < 300; ++trial) {
            GroupLoads g;
            g.rp = 2;
            g.members = {0, 1};
            g.loads = {uniform_in(rng, 0.0, 1e6), uniform_in(rng, 0.0, 1e6)};
            for (std::size_t i = 0; i < 2; ++i) {
                const double r = achievable_rate(g, i, sc.channels, params);
                CHECK(r * params.slot_seconds >= g.loads[i] * (1.0 - 1e-6));
            }
        }
    }
}

TEST_CASE("system energy sums the three roles") {
    const SystemParams params = default_params();
    Scenario sc = uniform_gain_scenario({1e6, 5e5, 2e5}, 1e-6, params);

    double all_su = 0.0;
    for (int m = 0; m < sc.size(); ++m)
        all_su += standalone_energy(sc.ue(m), params.slot_seconds);

    SECTION("no plans means everyone standalone") {
        CHECK(system_energy({}, sc) == Approx(all_su).epsilon(1e-15));
    }
    SECTION("a zero-load pair is energy neutral") {
        std::vector<GroupLoads> plans{one_member_group(1, 0, 0.0)};
        CHECK(system_energy(plans, sc) == Approx(all_su).epsilon(1e-15));
    }
    SECTION("energies are finite and nonnegative") {
        std::vector<GroupLoads> plans{one_member_group(1, 0, 2e5)};
        const double e = system_energy(plans, sc);
        CHECK(std::isfinite(e));
        CHECK(e >= 0.0);
    }
}
