#pragma once

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mucc/oracle.hpp"
#include "mucc/serialize.hpp"

namespace mucc {

// Algorithms the harness can run on a scenario.
//   local      everyone computes alone
//   random     random disjoint pairs, random orientation
//   irving     roommate role assignment only
//   irving_gs  roles + quota association + per-group optimization
//   pipeline   the full scheme including the rotation stage
//   es         exhaustive search (small scenarios only)
inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> algos{"local",  "random",   "irving",
                                                "irving_gs", "pipeline", "es"};
    return algos;
}

struct ExperimentConfig {
    SystemParams params;
    UeDefaults ue;
    double task_bits_min = 0.0;
    double task_bits_max = 1e6;
    std::vector<int> n_list{2, 4, 6, 8};
    int seeds = 20;
    std::vector<std::string> algos{"local", "random", "irving", "irving_gs", "pipeline"};
    std::string out_dir = "out";
    bool trace = false;
    bool enable_rso = true;
    int es_limit = 8;
    bool svg = false;
    int workers = 0;  // 0: hardware concurrency

    void validate() const {
        params.validate();
        check_arg(task_bits_min >= 0.0 && task_bits_min <= task_bits_max,
                  "task bits range must satisfy 0 <= min <= max");
        check_arg(seeds >= 1, "seeds must be >= 1");
        check_arg(!n_list.empty(), "n_list must not be empty");
        for (int n : n_list) check_arg(n >= 1, "n_list entries must be >= 1");
        for (const std::string& a : algos) {
            bool known = false;
            for (const std::string& k : known_algorithms()) known |= (k == a);
            check_arg(known, "unknown algorithm name");
            if (a == "es")
                for (int n : n_list)
                    check_arg(n <= es_limit, "exhaustive search requested beyond es_limit");
        }
    }
};

// ---------------------------------------------------------------------------
// Key/value configuration files: one `key = value` per line, '#' comments.
// Keys mirror the CLI defaults; unknown keys are an error.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::parse_bool;
    using detail::split_csv;
    if (key == "tau") cfg.params.slot_seconds = std::stod(value);
    else if (key == "bandwidth") cfg.params.bandwidth_hz = std::stod(value);
    else if (key == "noise_power") cfg.params.noise_power_w = std::stod(value);
    else if (key == "pathloss_exponent") cfg.params.pathloss_exponent = std::stod(value);
    else if (key == "area_side") cfg.params.area_side_m = std::stod(value);
    else if (key == "coop_epsilon") cfg.params.coop_epsilon_j = std::stod(value);
    else if (key == "seed") cfg.params.rng_seed = std::stoull(value);
    else if (key == "cycles_per_bit") cfg.ue.cycles_per_bit = std::stod(value);
    else if (key == "cap_coeff") cfg.ue.cap_coeff = std::stod(value);
    else if (key == "max_tx_power") cfg.ue.max_tx_power_w = std::stod(value);
    else if (key == "quota") cfg.ue.quota = std::stoi(value);
    else if (key == "available_energy") cfg.ue.available_energy_j = std::stod(value);
    else if (key == "energy_threshold") cfg.ue.energy_threshold_j = std::stod(value);
    else if (key == "task_bits_min") cfg.task_bits_min = std::stod(value);
    else if (key == "task_bits_max") cfg.task_bits_max = std::stod(value);
    else if (key == "n_list") {
        cfg.n_list.clear();
        for (const std::string& v : split_csv(value)) cfg.n_list.push_back(std::stoi(v));
    } else if (key == "seeds") cfg.seeds = std::stoi(value);
    else if (key == "algos") cfg.algos = split_csv(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "trace") cfg.trace = parse_bool(value, key);
    else if (key == "rso") cfg.enable_rso = parse_bool(value, key);
    else if (key == "es_limit") cfg.es_limit = std::stoi(value);
    else if (key == "svg") cfg.svg = parse_bool(value, key);
    else if (key == "workers") cfg.workers = std::stoi(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    check_arg(in.good(), "cannot open config file");
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct RunRecord {
    std::string algo;
    int n = 0;
    std::uint64_t seed = 0;
    double energy_j = 0.0;
    int rso_rounds = 0;
    bool rso_truncated = false;
    int sca_iterations = 0;
    double wall_ms = 0.0;  // diagnostic; kept out of the canonical CSV
};

struct SweepResult {
    std::vector<RunRecord> runs;  // ordered by (n, seed, algo)
};

inline Scenario scenario_for_cell(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
    SystemParams p = cfg.params;
    p.rng_seed = seed;
    return generate_scenario(p, n, {cfg.task_bits_min, cfg.task_bits_max}, cfg.ue);
}

inline RunRecord run_algorithm(const ExperimentConfig& cfg, const std::string& algo,
                               const Scenario& sc, std::uint64_t seed) {
    RunRecord rec;
    rec.algo = algo;
    rec.n = sc.size();
    rec.seed = seed;
    const double t0 = detail::now_ms();
    if (algo == "local") {
        rec.energy_j = baseline_local(sc);
    } else if (algo == "random") {
        rec.energy_j = baseline_random_pairs(sc, seed * 2654435761u + 17).energy_j;
    } else if (algo == "irving") {
        rec.energy_j = baseline_roommates_only(sc).energy_j;
    } else if (algo == "irving_gs") {
        rec.energy_j = baseline_roommates_gs(sc).energy_j;
    } else if (algo == "pipeline") {
        PipelineOptions opt;
        opt.enable_rso = cfg.enable_rso;
        PipelineResult r = run_pipeline(sc, opt);
        rec.energy_j = r.energy_j;
        rec.rso_rounds = static_cast<int>(r.rso_rounds.size());
        rec.rso_truncated = r.rso_truncated;
        rec.sca_iterations = r.sca_iterations;
    } else if (algo == "es") {
        rec.energy_j = exhaustive_search(sc, cfg.es_limit).energy_j;
    } else {
        throw std::invalid_argument("unknown algorithm '" + algo + "'");
    }
    rec.wall_ms = detail::now_ms() - t0;
    return rec;
}

// Every algorithm sees the identical scenario for a given (n, seed) cell.
// Cells run on a small worker pool; records land in preallocated slots, so
// the output order is independent of scheduling.
inline SweepResult sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Cell {
        int n;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int n : cfg.n_list)
        for (int s = 0; s < cfg.seeds; ++s)
            cells.push_back({n, cfg.params.rng_seed + static_cast<std::uint64_t>(s)});

    SweepResult result;
    result.runs.resize(cells.size() * cfg.algos.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= cells.size()) return;
                const Cell& cell = cells[idx];
                const Scenario sc = scenario_for_cell(cfg, cell.n, cell.seed);
                for (std::size_t a = 0; a < cfg.algos.size(); ++a)
                    result.runs[idx * cfg.algos.size() + a] =
                        run_algorithm(cfg, cfg.algos[a], sc, cell.seed);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(cells.size());  // stop the other workers
        }
    };

    unsigned n_workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                         : std::thread::hardware_concurrency();
    if (n_workers == 0) n_workers = 1;
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(cells.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

// ---------------------------------------------------------------------------
// Output files. runs.csv and summary.csv are canonical and byte-stable for
// a fixed config and seed; timings go to the JSON trace only.
// ---------------------------------------------------------------------------

struct SummaryRow {
    std::string algo;
    int n = 0;
    int runs = 0;
    double mean_energy_j = 0.0;
    double stderr_energy_j = 0.0;
};

inline std::vector<SummaryRow> summarize(const SweepResult& sweep_result) {
    std::map<std::pair<std::string, int>, std::vector<double>> buckets;
    for (const RunRecord& r : sweep_result.runs)
        buckets[{r.algo, r.n}].push_back(r.energy_j);
    std::vector<SummaryRow> rows;
    for (const auto& [key, xs] : buckets) {
        SummaryRow row;
        row.algo = key.first;
        row.n = key.second;
        row.runs = static_cast<int>(xs.size());
        row.mean_energy_j = mean_of(xs);
        row.stderr_energy_j = stderr_of(xs);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string runs_csv(const SweepResult& r) {
    std::string out = "algo,n,seed,energy_j,rso_rounds,rso_truncated,sca_iterations\n";
    for (const RunRecord& rec : r.runs) {
        out += rec.algo;
        out += ',';
        out += std::to_string(rec.n);
        out += ',';
        out += std::to_string(rec.seed);
        out += ',';
        out += fmt_double(rec.energy_j);
        out += ',';
        out += std::to_string(rec.rso_rounds);
        out += ',';
        out += rec.rso_truncated ? "1" : "0";
        out += ',';
        out += std::to_string(rec.sca_iterations);
        out += '\n';
    }
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "algo,n,runs,mean_energy_j,stderr_energy_j\n";
    for (const SummaryRow& row : rows) {
        out += row.algo;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.runs);
        out += ',';
        out += fmt_double(row.mean_energy_j);
        out += ',';
        out += fmt_double(row.stderr_energy_j);
        out += '\n';
    }
    return out;
}

// Minimal line chart of mean energy versus UE count, one polyline per
// algorithm. Decorative output; the CSVs are canonical.
inline std::string energy_chart_svg(const std::vector<SummaryRow>& rows) {
    const double width = 640, height = 440, ml = 70, mr = 20, mt = 20, mb = 50;
    double max_energy = 0.0;
    int max_n = 1, min_n = 1 << 30;
    std::vector<std::string> algos;
    for (const SummaryRow& r : rows) {
        max_energy = std::max(max_energy, r.mean_energy_j);
        max_n = std::max(max_n, r.n);
        min_n = std::min(min_n, r.n);
        if (std::find(algos.begin(), algos.end(), r.algo) == algos.end())
            algos.push_back(r.algo);
    }
    if (max_energy <= 0.0) max_energy = 1.0;
    if (min_n >= max_n) min_n = std::max(1, max_n - 1);
    auto x_of = [&](double n) {
        return ml + (n - min_n) / double(max_n - min_n) * (width - ml - mr);
    };
    auto y_of = [&](double e) {
        return height - mb - e / max_energy * (height - mt - mb);
    };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                   "#d62728", "#9467bd", "#8c564b"};
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\">\n"
        "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    svg += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(height - mb) +
           "\" x2=\"" + fmt_double(width - mr) + "\" y2=\"" + fmt_double(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(mt) + "\" x2=\"" +
           fmt_double(ml) + "\" y2=\"" + fmt_double(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt_double(width / 2) + "\" y=\"" + fmt_double(height - 10) +
           "\" text-anchor=\"middle\" font-size=\"14\">number of UEs</text>\n";
    svg += "<text x=\"15\" y=\"" + fmt_double(height / 2) +
           "\" transform=\"rotate(-90 15 " + fmt_double(height / 2) +
           ")\" text-anchor=\"middle\" font-size=\"14\">mean energy (J)</text>\n";
    int color_idx = 0;
    double legend_y = mt + 10;
    for (const std::string& algo : algos) {
        const char* color = colors[color_idx % 6];
        std::string points;
        for (const SummaryRow& r : rows)
            if (r.algo == algo)
                points += fmt_double(x_of(r.n)) + "," + fmt_double(y_of(r.mean_energy_j)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
        svg += "<text x=\"" + fmt_double(width - mr - 120) + "\" y=\"" +
               fmt_double(legend_y) + "\" font-size=\"13\" fill=\"" + color + "\">" +
               algo + "</text>\n";
        legend_y += 18;
        ++color_idx;
    }
    svg += "</svg>\n";
    return svg;
}

// Bar chart of per-demander offloads before/after the rotation stage.
inline std::string snapshot_chart_svg(const OffloadSnapshot& snap) {
    const std::size_t n = snap.before_bits.size();
    const double width = 640, height = 440, ml = 70, mr = 20, mt = 20, mb = 50;
    double max_bits = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        max_bits = std::max({max_bits, snap.before_bits[i], snap.after_bits[i]});
    const double band = (width - ml - mr) / double(n);
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\">\n"
        "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ml + band * static_cast<double>(i);
        const double hb = snap.before_bits[i] / max_bits * (height - mt - mb);
        const double ha = snap.after_bits[i] / max_bits * (height - mt - mb);
        svg += "<rect x=\"" + fmt_double(x + band * 0.15) + "\" y=\"" +
               fmt_double(height - mb - hb) + "\" width=\"" + fmt_double(band * 0.3) +
               "\" height=\"" + fmt_double(hb) + "\" fill=\"#1f77b4\"/>\n";
        svg += "<rect x=\"" + fmt_double(x + band * 0.55) + "\" y=\"" +
               fmt_double(height - mb - ha) + "\" width=\"" + fmt_double(band * 0.3) +
               "\" height=\"" + fmt_double(ha) + "\" fill=\"#ff7f0e\"/>\n";
        svg += "<text x=\"" + fmt_double(x + band / 2) + "\" y=\"" +
               fmt_double(height - mb + 16) + "\" text-anchor=\"middle\" font-size=\"11\">" +
               std::to_string(i) + "</text>\n";
    }
    svg += "<text x=\"" + fmt_double(width - mr - 160) + "\" y=\"" + fmt_double(mt + 10) +
           "\" font-size=\"13\" fill=\"#1f77b4\">before rotation</text>\n";
    svg += "<text x=\"" + fmt_double(width - mr - 160) + "\" y=\"" + fmt_double(mt + 28) +
           "\" font-size=\"13\" fill=\"#ff7f0e\">after rotation</text>\n";
    svg += "<text x=\"" + fmt_double(width / 2) + "\" y=\"" + fmt_double(height - 10) +
           "\" text-anchor=\"middle\" font-size=\"14\">UE id</text>\n";
    svg += "</svg>\n";
    return svg;
}

inline void emit_outputs(const SweepResult& sweep_result, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_text_file((fs::path(cfg.out_dir) / "runs.csv").string(), runs_csv(sweep_result));
    const std::vector<SummaryRow> rows = summarize(sweep_result);
    write_text_file((fs::path(cfg.out_dir) / "summary.csv").string(), summary_csv(rows));
    if (cfg.svg)
        write_text_file((fs::path(cfg.out_dir) / "energy_vs_n.svg").string(),
                        energy_chart_svg(rows));
}

inline std::string snapshot_csv(const Scenario& sc, const OffloadSnapshot& snap) {
    std::string out = "ue,task_bits,offload_before_bits,offload_after_bits\n";
    for (int m = 0; m < sc.size(); ++m) {
        out += std::to_string(m);
        out += ',';
        out += fmt_double(sc.ue(m).task_bits);
        out += ',';
        out += fmt_double(snap.before_bits[static_cast<std::size_t>(m)]);
        out += ',';
        out += fmt_double(snap.after_bits[static_cast<std::size_t>(m)]);
        out += '\n';
    }
    return out;
}

}  // namespace mucc
