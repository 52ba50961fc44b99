// Command-line harness for the cooperative-computing simulator: single runs
// with a JSON trace, energy sweeps against the baselines, offload snapshots
// around the rotation stage, and a property audit over many seeds.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mucc/experiment.hpp"

namespace fs = std::filesystem;
using namespace mucc;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::vector<int> n_list;
    int seeds = -1;
    std::string algos_csv;
    bool trace = false;
    bool no_rso = false;
    int es_limit = -1;
    bool svg = false;
    int workers = -1;
};

ExperimentConfig make_config(const CommonFlags& f) {
    ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = load_config_file(f.config_path);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.n_list.empty()) cfg.n_list = f.n_list;
    if (f.seeds >= 0) cfg.seeds = f.seeds;
    if (!f.algos_csv.empty()) cfg.algos = detail::split_csv(f.algos_csv);
    if (f.trace) cfg.trace = true;
    if (f.no_rso) cfg.enable_rso = false;
    if (f.es_limit >= 0) cfg.es_limit = f.es_limit;
    if (f.svg) cfg.svg = true;
    if (f.workers >= 0) cfg.workers = f.workers;
    return cfg;
}

void add_common_flags(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config_path, "key=value configuration file");
    app->add_option("--out", f.out_dir, "output directory");
    app->add_option("--n-list", f.n_list, "UE counts, comma separated")->delimiter(',');
    app->add_option("--seeds", f.seeds, "seeds per sweep point");
    app->add_option("--algos", f.algos_csv, "algorithms, comma separated");
    app->add_flag("--trace", f.trace, "write a JSON trace");
    app->add_flag("--no-rso", f.no_rso, "disable the rotation stage");
    app->add_option("--es-limit", f.es_limit, "max UE count for exhaustive search");
    app->add_flag("--svg", f.svg, "also write SVG charts");
    app->add_option("--workers", f.workers, "worker threads for sweeps");
}

int cmd_run(const CommonFlags& flags, int n, std::uint64_t seed) {
    ExperimentConfig cfg = make_config(flags);
    cfg.validate();
    SystemParams params = cfg.params;
    params.rng_seed = seed;
    const Scenario sc = generate_scenario(params, n, {cfg.task_bits_min, cfg.task_bits_max},
                                          cfg.ue);
    PipelineOptions opt;
    opt.enable_rso = cfg.enable_rso;
    const PipelineResult result = run_pipeline(sc, opt);

    std::printf("n=%d seed=%llu energy=%s J (local %s J)\n", n,
                static_cast<unsigned long long>(seed), fmt_double(result.energy_j).c_str(),
                fmt_double(baseline_local(sc)).c_str());
    std::printf("roles: %zu demanders, %zu providers, %zu standalone; rso rounds=%zu\n",
                result.partition.rds.size(), result.partition.rps.size(),
                result.partition.sus.size(), result.rso_rounds.size());

    fs::create_directories(cfg.out_dir);
    std::string csv = "ue,role,partner,task_bits,offload_bits,tx_power_w,energy_j\n";
    std::vector<double> offload(static_cast<std::size_t>(sc.size()), 0.0);
    std::vector<double> power(static_cast<std::size_t>(sc.size()), 0.0);
    std::vector<double> energy(static_cast<std::size_t>(sc.size()), 0.0);
    for (int m = 0; m < sc.size(); ++m)
        energy[static_cast<std::size_t>(m)] = standalone_energy(sc.ue(m), sc.params.slot_seconds);
    for (const GroupLoads& g : result.plans) {
        energy[static_cast<std::size_t>(g.rp)] = rp_energy(sc.ue(g.rp), g, sc.params.slot_seconds);
        for (std::size_t i = 0; i < g.count(); ++i) {
            const int id = g.members[i];
            offload[static_cast<std::size_t>(id)] = g.loads[i];
            power[static_cast<std::size_t>(id)] = tx_power(g, i, sc.channels, sc.params);
            energy[static_cast<std::size_t>(id)] =
                rd_total_energy(sc.ue(id), g, i, sc.channels, sc.params);
        }
    }
    for (int m = 0; m < sc.size(); ++m) {
        std::string role = "su";
        for (int id : result.partition.rds)
            if (id == m) role = "rd";
        for (int id : result.partition.rps)
            if (id == m) role = "rp";
        csv += std::to_string(m) + "," + role + "," +
               std::to_string(result.association.rp_of[static_cast<std::size_t>(m)]) + "," +
               fmt_double(sc.ue(m).task_bits) + "," +
               fmt_double(offload[static_cast<std::size_t>(m)]) + "," +
               fmt_double(power[static_cast<std::size_t>(m)]) + "," +
               fmt_double(energy[static_cast<std::size_t>(m)]) + "\n";
    }
    write_text_file((fs::path(cfg.out_dir) / "run_per_ue.csv").string(), csv);
    if (cfg.trace) {
        json trace = pipeline_trace_json(sc, result);
        trace["scenario"] = scenario_to_json(sc);
        write_text_file((fs::path(cfg.out_dir) / "run_trace.json").string(),
                        trace.dump(2) + "\n");
    }
    std::printf("wrote %s\n", (fs::path(cfg.out_dir) / "run_per_ue.csv").string().c_str());
    return 0;
}

int cmd_sweep(const CommonFlags& flags) {
    ExperimentConfig cfg = make_config(flags);
    cfg.validate();
    const SweepResult result = sweep(cfg);
    emit_outputs(result, cfg);
    for (const SummaryRow& row : summarize(result))
        std::printf("%-10s n=%-3d runs=%-3d mean=%.6g J  se=%.3g J\n", row.algo.c_str(),
                    row.n, row.runs, row.mean_energy_j, row.stderr_energy_j);
    std::printf("wrote %s and %s\n", (fs::path(cfg.out_dir) / "runs.csv").string().c_str(),
                (fs::path(cfg.out_dir) / "summary.csv").string().c_str());
    return 0;
}

int cmd_snapshot(const CommonFlags& flags, int n, std::uint64_t seed) {
    ExperimentConfig cfg = make_config(flags);
    cfg.validate();
    SystemParams params = cfg.params;
    params.rng_seed = seed;
    const Scenario sc = generate_scenario(params, n, {cfg.task_bits_min, cfg.task_bits_max},
                                          cfg.ue);
    const OffloadSnapshot snap = offload_snapshot(sc);
    fs::create_directories(cfg.out_dir);
    write_text_file((fs::path(cfg.out_dir) / "snapshot.csv").string(),
                    snapshot_csv(sc, snap));
    std::string summary = "energy_before_j,energy_after_j,rso_rounds\n";
    summary += fmt_double(snap.energy_before_j) + "," + fmt_double(snap.energy_after_j) +
               "," + std::to_string(snap.after.rso_rounds.size()) + "\n";
    write_text_file((fs::path(cfg.out_dir) / "snapshot_summary.csv").string(), summary);
    if (cfg.svg)
        write_text_file((fs::path(cfg.out_dir) / "offload_snapshot.svg").string(),
                        snapshot_chart_svg(snap));
    std::printf("energy before rotation %s J, after %s J\n",
                fmt_double(snap.energy_before_j).c_str(),
                fmt_double(snap.energy_after_j).c_str());
    return 0;
}

// Property audit over many seeds: stability of both matchings, constraint
// audit, rotation guarantees, solver descent, and the energy orderings.
int cmd_audit(const CommonFlags& flags) {
    ExperimentConfig cfg = make_config(flags);
    cfg.validate();
    int failures = 0;
    long scenarios = 0, blocking_checks = 0, rso_rounds = 0;
    auto fail = [&](const std::string& what, int n, std::uint64_t seed) {
        std::printf("[FAIL] %s (n=%d seed=%llu)\n", what.c_str(), n,
                    static_cast<unsigned long long>(seed));
        ++failures;
    };
    for (int n : cfg.n_list) {
        for (int s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t seed = cfg.params.rng_seed + static_cast<std::uint64_t>(s);
            const Scenario sc = scenario_for_cell(cfg, n, seed);
            ++scenarios;
            PipelineOptions opt;
            opt.enable_rso = cfg.enable_rso;
            PipelineResult r;
            try {
                r = run_pipeline(sc, opt);
            } catch (const std::exception& e) {
                fail(std::string("pipeline audit: ") + e.what(), n, seed);
                continue;
            }
            const std::vector<int> eligible = role_control(sc);
            const RoommatePrefs prefs = build_roommate_prefs(sc, eligible);
            if (!find_roommate_blocking_pairs(r.partition, prefs).empty())
                fail("roommate matching has a blocking pair", n, seed);
            std::vector<int> quotas(static_cast<std::size_t>(sc.size()));
            for (int m = 0; m < sc.size(); ++m)
                quotas[static_cast<std::size_t>(m)] = sc.ue(m).quota;
            if (!find_admission_blocking_pairs(r.gs_association, r.assoc_prefs, quotas).empty())
                fail("deferred acceptance output has a blocking pair", n, seed);
            blocking_checks += 2;
            rso_rounds += static_cast<long>(r.rso_rounds.size());
            if (r.energy_j > baseline_local(sc) + 1e-9)
                fail("pipeline energy exceeds local computing", n, seed);
            bool has_es = false;
            for (const std::string& a : cfg.algos) has_es |= (a == "es");
            if (has_es && n <= cfg.es_limit) {
                const EsResult es = exhaustive_search(sc, cfg.es_limit);
                if (es.energy_j > r.energy_j * (1.0 + 1e-6))
                    fail("exhaustive search lost to the pipeline", n, seed);
            }
        }
    }
    std::printf("audited %ld scenarios, %ld blocking-pair checks, %ld rotation rounds: %s\n",
                scenarios, blocking_checks, rso_rounds,
                failures == 0 ? "all clean" : "FAILURES PRESENT");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matching-based multi-user cooperative computing simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, snap_flags, audit_flags;
    int run_n = 10, snap_n = 10;
    std::uint64_t run_seed = 1, snap_seed = 1;

    CLI::App* run = app.add_subcommand("run", "single scenario end to end");
    add_common_flags(run, run_flags);
    run->add_option("--n", run_n, "number of UEs");
    run->add_option("--scenario-seed", run_seed, "scenario seed");

    CLI::App* sw = app.add_subcommand("sweep", "energy versus UE count, all algorithms");
    add_common_flags(sw, sweep_flags);

    CLI::App* snap = app.add_subcommand("snapshot", "per-UE offloads before/after rotation");
    add_common_flags(snap, snap_flags);
    snap->add_option("--n", snap_n, "number of UEs");
    snap->add_option("--scenario-seed", snap_seed, "scenario seed");

    CLI::App* audit = app.add_subcommand("audit", "property audit over many seeds");
    add_common_flags(audit, audit_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags, run_n, run_seed);
        if (sw->parsed()) return cmd_sweep(sweep_flags);
        if (snap->parsed()) return cmd_snapshot(snap_flags, snap_n, snap_seed);
        if (audit->parsed()) return cmd_audit(audit_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
