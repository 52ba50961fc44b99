#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>

#include "mucc/experiment.hpp"
#include "support.hpp"

using namespace mucc;
using namespace mucc::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("a single UE runs standalone through the whole pipeline") {
    const Scenario sc = generate_scenario(default_params(5), 1, {1e6, 1e6});
    const PipelineResult r = run_pipeline(sc);
    CHECK(r.partition.sus == std::vector<int>{0});
    CHECK(r.plans.empty());
    CHECK(r.energy_j == Approx(standalone_energy(sc.ue(0), 0.2)).epsilon(1e-15));
}

TEST_CASE("pipeline results are reproducible") {
    const Scenario sc = generate_scenario(default_params(17), 10, {0.0, 1e6});
    const PipelineResult a = run_pipeline(sc);
    const PipelineResult b = run_pipeline(sc);
    CHECK(a.energy_j == b.energy_j);
    CHECK(a.association.rp_of == b.association.rp_of);
    REQUIRE(a.plans.size() == b.plans.size());
    for (std::size_t i = 0; i < a.plans.size(); ++i)
        CHECK(a.plans[i].loads == b.plans[i].loads);
}

TEST_CASE("pipeline energy never exceeds local computing") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Scenario sc = generate_scenario(default_params(seed), 10, {0.0, 1e6});
        const PipelineResult r = run_pipeline(sc);
        CHECK(r.energy_j <= baseline_local(sc) + 1e-9);
    }
}

TEST_CASE("rotation stage never raises the system energy") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Scenario sc = generate_scenario(default_params(seed), 10, {0.0, 1e6});
        const OffloadSnapshot snap = offload_snapshot(sc);
        CHECK(snap.energy_after_j <= snap.energy_before_j + 1e-9);
        if (snap.after.rso_rounds.empty()) {
            // cabal-free scenarios pass through unchanged
            CHECK(snap.after_bits == snap.before_bits);
            CHECK(snap.energy_after_j == snap.energy_before_j);
        }
    }
}

TEST_CASE("every accepted rotation round weakly improves each demander") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Scenario sc = generate_scenario(default_params(seed), 10, {0.0, 1e6});
        const PipelineResult r = run_pipeline(sc);
        Association cur = r.before_rso;
        for (const RsoRound& round : r.rso_rounds) {
            if (!round.accepted) continue;
            for (int i : r.assoc_prefs.rd_ids) {
                const PreferenceList& pl =
                    r.assoc_prefs.rd_lists[static_cast<std::size_t>(i)];
                const int before = cur.rp_of[static_cast<std::size_t>(i)];
                const int after = round.candidate.rp_of[static_cast<std::size_t>(i)];
                if (before == after) continue;
                REQUIRE(after != -1);
                if (before != -1) CHECK(pl.rank_of(after) <= pl.rank_of(before));
            }
            cur = round.candidate;
        }
        CHECK(cur == r.association);
    }
}

TEST_CASE("the constraint audit rejects corrupted plans") {
    const Scenario sc = generate_scenario(default_params(23), 8, {2e5, 1e6});
    PipelineResult r = run_pipeline(sc);
    if (r.plans.empty()) return;  // nothing to corrupt on this seed

    SECTION("offload beyond the task size") {
        auto plans = r.plans;
        plans[0].loads[0] = sc.ue(plans[0].members[0]).task_bits * 2.0;
        CHECK_THROWS(audit_constraints(sc, r.partition, r.association, plans));
    }
    SECTION("provider without the provider role") {
        auto plans = r.plans;
        auto part = r.partition;
        part.rps.erase(std::find(part.rps.begin(), part.rps.end(), plans[0].rp));
        part.sus.push_back(plans[0].rp);
        CHECK_THROWS(audit_constraints(sc, part, r.association, plans));
    }
}

TEST_CASE("sweeps give every algorithm the same scenario per cell") {
    ExperimentConfig cfg;
    cfg.n_list = {4, 6};
    cfg.seeds = 3;
    cfg.algos = {"local", "irving", "pipeline"};
    cfg.workers = 2;
    const SweepResult res = sweep(cfg);
    REQUIRE(res.runs.size() == 2 * 3 * 3);
    // rows are grouped per (n, seed) cell in fixed algorithm order
    for (std::size_t i = 0; i < res.runs.size(); i += 3) {
        CHECK(res.runs[i].algo == "local");
        CHECK(res.runs[i + 1].algo == "irving");
        CHECK(res.runs[i + 2].algo == "pipeline");
        CHECK(res.runs[i].n == res.runs[i + 1].n);
        CHECK(res.runs[i].seed == res.runs[i + 1].seed);
        // cooperation never loses to local on the identical scenario
        CHECK(res.runs[i + 1].energy_j <= res.runs[i].energy_j + 1e-9);
        CHECK(res.runs[i + 2].energy_j <= res.runs[i].energy_j + 1e-9);
    }
}

TEST_CASE("sweep outputs are byte-identical across reruns") {
    namespace fs = std::filesystem;
    ExperimentConfig cfg;
    cfg.n_list = {4, 5};
    cfg.seeds = 2;
    cfg.algos = {"local", "pipeline"};
    cfg.svg = true;

    const fs::path base = fs::temp_directory_path() / "mucc_test_out";
    fs::remove_all(base);
    cfg.out_dir = (base / "a").string();
    emit_outputs(sweep(cfg), cfg);
    cfg.out_dir = (base / "b").string();
    emit_outputs(sweep(cfg), cfg);

    for (const char* name : {"runs.csv", "summary.csv", "energy_vs_n.svg"})
        CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
    fs::remove_all(base);
}

TEST_CASE("config files round-trip the documented keys") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "mucc_test_config.cfg";
    {
        std::ofstream out(path);
        out << "# scenario parameters\n"
               "tau = 0.1\n"
               "bandwidth = 2e6\n"
               "noise_power = 1e-8\n"
               "pathloss_exponent = 3.5\n"
               "area_side = 50\n"
               "coop_epsilon = 1e-8\n"
               "seed = 99\n"
               "cycles_per_bit = 600\n"
               "cap_coeff = 2e-28\n"
               "max_tx_power = 0.2\n"
               "quota = 3\n"
               "available_energy = 10\n"
               "energy_threshold = 1\n"
               "task_bits_min = 1e3\n"
               "task_bits_max = 5e5\n"
               "n_list = 4, 8\n"
               "seeds = 7\n"
               "algos = local, pipeline\n"
               "out_dir = results\n"
               "trace = true\n"
               "rso = false\n"
               "es_limit = 6\n"
               "svg = true\n"
               "workers = 2\n";
    }
    const ExperimentConfig cfg = load_config_file(path.string());
    CHECK(cfg.params.slot_seconds == 0.1);
    CHECK(cfg.params.bandwidth_hz == 2e6);
    CHECK(cfg.params.noise_power_w == 1e-8);
    CHECK(cfg.params.pathloss_exponent == 3.5);
    CHECK(cfg.params.area_side_m == 50.0);
    CHECK(cfg.params.coop_epsilon_j == 1e-8);
    CHECK(cfg.params.rng_seed == 99);
    CHECK(cfg.ue.cycles_per_bit == 600.0);
    CHECK(cfg.ue.cap_coeff == 2e-28);
    CHECK(cfg.ue.max_tx_power_w == 0.2);
    CHECK(cfg.ue.quota == 3);
    CHECK(cfg.ue.available_energy_j == 10.0);
    CHECK(cfg.ue.energy_threshold_j == 1.0);
    CHECK(cfg.task_bits_min == 1e3);
    CHECK(cfg.task_bits_max == 5e5);
    CHECK(cfg.n_list == std::vector<int>{4, 8});
    CHECK(cfg.seeds == 7);
    CHECK(cfg.algos == std::vector<std::string>{"local", "pipeline"});
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.trace);
    CHECK(!cfg.enable_rso);
    CHECK(cfg.es_limit == 6);
    CHECK(cfg.svg);
    CHECK(cfg.workers == 2);
    std::filesystem::remove(path);

    // unknown keys are rejected
    ExperimentConfig dummy;
    CHECK_THROWS_AS(apply_config_entry(dummy, "not_a_key", "1"), std::invalid_argument);
}

TEST_CASE("battery-gated UEs only appear as demanders or standalone") {
    Scenario sc = generate_scenario(default_params(31), 10, {0.0, 1e6});
    for (int m = 0; m < sc.size(); m += 3) {
        sc.ues[static_cast<std::size_t>(m)].available_energy_j = 0.0;
        sc.ues[static_cast<std::size_t>(m)].energy_threshold_j = 1.0;
    }
    const PipelineResult r = run_pipeline(sc);
    for (int rp : r.partition.rps) CHECK(rp % 3 != 0);
}
