#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mucc/energy.hpp"

namespace mucc {

// A cooperation group before loads are chosen.
struct Group {
    int rp = -1;
    std::vector<int> members;
};

struct ScaConfig {
    double prox_weight = -1.0;  // < 0: scale from the group's Lipschitz constant
    double rel_tol = 1e-9;      // outer stop on relative objective change
    int max_iters = 60;
    double inner_tol = 1e-10;   // subproblem stop on relative objective change
    int inner_max_iters = 600;
    bool round_to_integer_bits = false;
};

struct ScaResult {
    GroupLoads plan;
    double objective_j = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // true objective after each accepted step
};

// Group energy under a candidate load vector: provider compute plus each
// member's remaining compute and uplink.
inline double group_objective(const Scenario& sc, const GroupLoads& g) {
    double total = rp_energy(sc.ue(g.rp), g, sc.params.slot_seconds);
    for (std::size_t i = 0; i < g.count(); ++i)
        total += rd_total_energy(sc.ue(g.members[i]), g, i, sc.channels, sc.params);
    return total;
}

// Gradient of member i's transmit power with respect to every load in the
// group. The own-load slope follows the group's total load; cross slopes
// vanish when the member sends nothing.
inline std::vector<double> power_gradient(const Scenario& sc, const GroupLoads& g,
                                          std::size_t member_pos) {
    require(member_pos < g.count(), "member position out of range");
    const double tw = sc.params.slot_bandwidth_product();
    const double c = std::log(2.0) / tw;
    const double n0 = sc.params.noise_power_w / sc.gain(g.members[member_pos], g.rp);
    const double total = g.total_load();
    const double others = total - g.loads[member_pos];
    const double e_total = std::exp2(total / tw);
    const double e_others = std::exp2(others / tw);
    std::vector<double> grad(g.count());
    for (std::size_t k = 0; k < g.count(); ++k)
        grad[k] = (k == member_pos) ? n0 * c * e_total : n0 * c * (e_total - e_others);
    return grad;
}

namespace detail {

// Diagonal of the power Hessian; all entries are nonnegative, which is what
// makes the diagonal quadratic surrogate convex.
inline std::vector<double> power_curvature_diag(const Scenario& sc, const GroupLoads& g,
                                                std::size_t member_pos) {
    const double tw = sc.params.slot_bandwidth_product();
    const double c = std::log(2.0) / tw;
    const double n0 = sc.params.noise_power_w / sc.gain(g.members[member_pos], g.rp);
    const double total = g.total_load();
    const double others = total - g.loads[member_pos];
    const double e_total = std::exp2(total / tw);
    const double e_others = std::exp2(others / tw);
    std::vector<double> curv(g.count());
    for (std::size_t k = 0; k < g.count(); ++k)
        curv[k] = (k == member_pos) ? n0 * c * c * e_total
                                    : n0 * c * c * (e_total - e_others);
    return curv;
}

}  // namespace detail

// Slope bounds of the power gradient over the feasible box, in the form
// (own-load constant, worst cross-load constant). Following the mean-slope
// construction, |G(x1) - G(x2)| <= L_C * L_i over the whole box; a zero-size
// box degenerates to 0.
inline std::pair<double, double> lipschitz_constants(const Scenario& sc, const Group& grp,
                                                     std::size_t member_pos) {
    require(member_pos < grp.members.size(), "member position out of range");
    const double tw = sc.params.slot_bandwidth_product();
    const double c = std::log(2.0) / tw;
    const double n0 = sc.params.noise_power_w / sc.gain(grp.members[member_pos], grp.rp);
    const double own_cap = sc.ue(grp.members[member_pos]).task_bits;

    double others_cap = 0.0;
    for (std::size_t n = 0; n < grp.members.size(); ++n)
        if (n != member_pos) others_cap += sc.ue(grp.members[n]).task_bits;

    double l_own = 0.0;
    if (own_cap > 0.0) {
        const double g_hi = n0 * c * std::exp2((own_cap + others_cap) / tw);
        const double g_lo = n0 * c * std::exp2(others_cap / tw);
        l_own = (g_hi - g_lo) / own_cap;
    }

    double l_cross = 0.0;
    for (std::size_t n = 0; n < grp.members.size(); ++n) {
        if (n == member_pos) continue;
        const double cross_cap = sc.ue(grp.members[n]).task_bits;
        if (cross_cap <= 0.0) continue;
        const double rest = others_cap - cross_cap;
        auto cross_grad = [&](double x) {
            return n0 * c * (std::exp2((own_cap + rest + x) / tw) -
                             std::exp2((rest + x) / tw));
        };
        l_cross = std::max(l_cross, (cross_grad(cross_cap) - cross_grad(0.0)) / cross_cap);
    }
    return {l_own, l_cross};
}

// Strongly convex model of one member's transmit power anchored at the
// current iterate: first-order term plus a proximal weight plus the diagonal
// quadratic of the power curvature. Exact in value and gradient at the
// anchor, convex everywhere.
struct PowerSurrogate {
    std::vector<double> anchor;
    double value_at_anchor = 0.0;
    std::vector<double> gradient;   // power gradient at the anchor
    std::vector<double> curvature;  // diagonal curvature at the anchor
    double lambda = 0.0;

    double eval(const std::vector<double>& x) const {
        double v = value_at_anchor;
        for (std::size_t k = 0; k < anchor.size(); ++k) {
            const double d = x[k] - anchor[k];
            v += gradient[k] * d + 0.5 * (lambda + curvature[k]) * d * d;
        }
        return v;
    }

    std::vector<double> grad(const std::vector<double>& x) const {
        std::vector<double> g(anchor.size());
        for (std::size_t k = 0; k < anchor.size(); ++k)
            g[k] = gradient[k] + (lambda + curvature[k]) * (x[k] - anchor[k]);
        return g;
    }
};

inline PowerSurrogate surrogate_power(const Scenario& sc, const GroupLoads& anchor_state,
                                      std::size_t member_pos, double lambda) {
    check_arg(lambda >= 0.0, "proximal weight must be >= 0");
    PowerSurrogate s;
    s.anchor = anchor_state.loads;
    s.value_at_anchor = tx_power(anchor_state, member_pos, sc.channels, sc.params);
    s.gradient = power_gradient(sc, anchor_state, member_pos);
    s.curvature = detail::power_curvature_diag(sc, anchor_state, member_pos);
    s.lambda = lambda;
    return s;
}

namespace detail {

constexpr double kPowerRelSlack = 1e-9;

inline bool power_feasible(const Scenario& sc, const GroupLoads& g) {
    for (std::size_t i = 0; i < g.count(); ++i) {
        const double cap = sc.ue(g.members[i]).max_tx_power_w;
        if (tx_power(g, i, sc.channels, sc.params) > cap * (1.0 + kPowerRelSlack))
            return false;
    }
    return true;
}

// One convex subproblem: minimize compute cubics plus the surrogate transmit
// energies over the box, keeping every surrogate power under its cap.
// Projected descent with a diagonal-curvature step and halving backtracking.
struct ConvexSubproblem {
    const Scenario* sc;
    const Group* grp;
    std::vector<double> box_hi;
    std::vector<double> power_caps;
    std::vector<PowerSurrogate> surrogates;

    double objective(const std::vector<double>& x) const {
        const double tau = sc->params.slot_seconds;
        double total = 0.0;
        const UeProfile& rp = sc->ue(grp->rp);
        double sum = 0.0;
        for (double v : x) sum += v;
        total += dvfs_energy(rp.cap_coeff, rp.cycles_per_bit, rp.task_bits + sum, tau);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const UeProfile& rd = sc->ue(grp->members[i]);
            total += dvfs_energy(rd.cap_coeff, rd.cycles_per_bit, rd.task_bits - x[i], tau);
            total += tau * surrogates[i].eval(x);
        }
        return total;
    }

    bool feasible(const std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (surrogates[i].eval(x) > power_caps[i] * (1.0 + 10 * kPowerRelSlack))
                return false;
        return true;
    }

    void gradient_and_curvature(const std::vector<double>& x, std::vector<double>& g,
                                std::vector<double>& h) const {
        const double tau = sc->params.slot_seconds;
        const UeProfile& rp = sc->ue(grp->rp);
        double sum = 0.0;
        for (double v : x) sum += v;
        const double rp_c3 = rp.cap_coeff * rp.cycles_per_bit * rp.cycles_per_bit *
                             rp.cycles_per_bit / (tau * tau);
        const double rp_sq = (rp.task_bits + sum) * (rp.task_bits + sum);
        g.assign(x.size(), 3.0 * rp_c3 * rp_sq);
        h.assign(x.size(), 6.0 * rp_c3 * (rp.task_bits + sum));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const UeProfile& rd = sc->ue(grp->members[i]);
            const double rd_c3 = rd.cap_coeff * rd.cycles_per_bit * rd.cycles_per_bit *
                                 rd.cycles_per_bit / (tau * tau);
            const double rem = rd.task_bits - x[i];
            g[i] -= 3.0 * rd_c3 * rem * rem;
            h[i] += 6.0 * rd_c3 * rem;
        }
        for (const PowerSurrogate& s : surrogates) {
            const std::vector<double> sg = s.grad(x);
            for (std::size_t k = 0; k < x.size(); ++k) {
                g[k] += tau * sg[k];
                h[k] += tau * (s.lambda + s.curvature[k]);
            }
        }
    }

    std::vector<double> solve(std::vector<double> x, double tol, int max_iters) const {
        double f = objective(x);
        std::vector<double> g, h, trial(x.size());
        for (int it = 0; it < max_iters; ++it) {
            gradient_and_curvature(x, g, h);
            double step = 1.0;
            bool moved = false;
            while (step > 1e-14) {
                double disp = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const double t = x[k] - step * g[k] / std::max(h[k], 1e-18);
                    trial[k] = std::clamp(t, 0.0, box_hi[k]);
                    disp = std::max(disp, std::abs(trial[k] - x[k]));
                }
                if (disp == 0.0) break;
                const double ft = objective(trial);
                if (ft <= f && feasible(trial)) {
                    const double improvement = f - ft;
                    x = trial;
                    f = ft;
                    moved = true;
                    if (improvement <= tol * std::max(std::abs(f), 1e-18)) return x;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return x;
    }
};

}  // namespace detail

// Successive convex approximation for one cooperation group. The primary
// run starts from zero offload (always feasible); each iteration solves the
// convex subproblem, then a damped update backtracks until the true
// objective does not increase and the true power caps hold, stopping on
// relative objective change. The group problem is non-convex and can carry
// more than one basin, so a coarse feasible probe grid may seed one restart;
// the best run is returned.
inline ScaResult solve_group(const Scenario& sc, const Group& grp,
                             const ScaConfig& cfg = {}) {
    const std::size_t m = grp.members.size();
    ScaResult res;
    res.plan.rp = grp.rp;
    res.plan.members = grp.members;
    res.plan.loads.assign(m, 0.0);
    res.objective_j = group_objective(sc, res.plan);
    res.objective_trace.push_back(res.objective_j);
    if (m == 0) {
        res.converged = true;
        return res;
    }

    double lambda = cfg.prox_weight;
    if (lambda < 0.0) {
        double max_lc = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            max_lc = std::max(max_lc, lipschitz_constants(sc, grp, i).first);
        lambda = 1e-6 * max_lc;
    }

    detail::ConvexSubproblem sub;
    sub.sc = &sc;
    sub.grp = &grp;
    sub.box_hi.resize(m);
    sub.power_caps.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        sub.box_hi[i] = sc.ue(grp.members[i]).task_bits;
        sub.power_caps[i] = sc.ue(grp.members[i]).max_tx_power_w;
    }

    struct Run {
        GroupLoads state;
        double objective = 0.0;
        int iterations = 0;
        bool converged = false;
        std::vector<double> trace;
    };
    auto run_from = [&](GroupLoads start) {
        Run run;
        run.state = std::move(start);
        run.objective = group_objective(sc, run.state);
        run.trace.push_back(run.objective);
        for (int outer = 0; outer < cfg.max_iters; ++outer) {
            sub.surrogates.clear();
            for (std::size_t i = 0; i < m; ++i)
                sub.surrogates.push_back(surrogate_power(sc, run.state, i, lambda));

            const std::vector<double> optimum =
                sub.solve(run.state.loads, cfg.inner_tol, cfg.inner_max_iters);

            // Damped update: shrink toward the current iterate until the
            // true objective is non-increasing and the true caps hold.
            GroupLoads trial = run.state;
            double gamma = 1.0;
            bool accepted = false;
            double f_new = run.objective;
            while (gamma >= 1e-9) {
                for (std::size_t k = 0; k < m; ++k)
                    trial.loads[k] = std::clamp(
                        run.state.loads[k] +
                            gamma * (optimum[k] - run.state.loads[k]),
                        0.0, sub.box_hi[k]);
                const double ft = group_objective(sc, trial);
                if (ft <= run.objective && detail::power_feasible(sc, trial)) {
                    accepted = true;
                    f_new = ft;
                    break;
                }
                gamma *= 0.5;
            }
            run.iterations = outer + 1;
            if (!accepted) {
                run.converged = true;  // no feasible descent step remains
                break;
            }
            const double drop = run.objective - f_new;
            run.state = trial;
            run.objective = f_new;
            run.trace.push_back(run.objective);
            if (drop <= cfg.rel_tol * std::max(std::abs(run.objective), 1e-18)) {
                run.converged = true;
                break;
            }
        }
        return run;
    };

    GroupLoads zero = res.plan;
    Run best = run_from(zero);
    int total_iterations = best.iterations;

    // Probe a coarse feasible lattice for a dominated basin; restart once
    // from the best probe point if it beats the zero-start result.
    {
        GroupLoads probe = res.plan;
        GroupLoads best_probe = res.plan;
        double best_probe_value = res.objective_j;  // zero-offload value
        const int steps = m == 1 ? 32 : (m == 2 ? 24 : 4);
        std::vector<int> idx(m, 0);
        for (;;) {
            for (std::size_t k = 0; k < m; ++k)
                probe.loads[k] = idx[k] == steps
                                     ? sub.box_hi[k]
                                     : std::min(sub.box_hi[k],
                                                sub.box_hi[k] * idx[k] / steps);
            if (detail::power_feasible(sc, probe)) {
                const double v = group_objective(sc, probe);
                if (v < best_probe_value) {
                    best_probe_value = v;
                    best_probe = probe;
                }
            }
            std::size_t k = 0;
            while (k < m && ++idx[k] > steps) idx[k++] = 0;
            if (k == m) break;
        }
        if (best_probe_value < best.objective) {
            Run alt = run_from(best_probe);
            total_iterations += alt.iterations;
            if (alt.objective < best.objective) best = std::move(alt);
        }
    }

    GroupLoads state = std::move(best.state);
    double f_cur = best.objective;
    res.iterations = total_iterations;
    res.converged = best.converged;
    res.objective_trace = std::move(best.trace);

    if (cfg.round_to_integer_bits) {
        GroupLoads rounded = state;
        for (double& l : rounded.loads) l = std::round(l);
        for (std::size_t k = 0; k < m; ++k)
            rounded.loads[k] = std::clamp(rounded.loads[k], 0.0, sub.box_hi[k]);
        while (!detail::power_feasible(sc, rounded)) {
            // round down the largest load until the caps hold again
            std::size_t worst = 0;
            for (std::size_t k = 1; k < m; ++k)
                if (rounded.loads[k] > rounded.loads[worst]) worst = k;
            if (rounded.loads[worst] <= 0.0) break;
            rounded.loads[worst] -= 1.0;
        }
        if (detail::power_feasible(sc, rounded) &&
            group_objective(sc, rounded) <= f_cur + 1e-12) {
            state = rounded;
            f_cur = group_objective(sc, state);
        }
    }

    res.plan = state;
    res.objective_j = f_cur;
    return res;
}

// Exhaustive scan of the feasible box at a fixed resolution; the reference
// the solver is verified against. Only defined for groups of one or two
// members.
inline std::pair<GroupLoads, double> grid_oracle(const Scenario& sc, const Group& grp,
                                                 int resolution) {
    check_arg(grp.members.size() >= 1 && grp.members.size() <= 2,
              "grid oracle supports only 1- or 2-member groups");
    check_arg(resolution >= 1, "resolution must be >= 1");

    GroupLoads best;
    best.rp = grp.rp;
    best.members = grp.members;
    best.loads.assign(grp.members.size(), 0.0);
    double best_value = group_objective(sc, best);

    GroupLoads probe = best;
    const double l0_max = sc.ue(grp.members[0]).task_bits;
    // a/resolution*max can land one ulp above max; keep grid points in the box
    auto grid_point = [](double hi, int idx, int res) {
        return idx == res ? hi : std::min(hi, hi * idx / res);
    };
    if (grp.members.size() == 1) {
        for (int a = 0; a <= resolution; ++a) {
            probe.loads[0] = grid_point(l0_max, a, resolution);
            if (!detail::power_feasible(sc, probe)) continue;
            const double v = group_objective(sc, probe);
            if (v < best_value) {
                best_value = v;
                best = probe;
            }
        }
    } else {
        const double l1_max = sc.ue(grp.members[1]).task_bits;
        for (int a = 0; a <= resolution; ++a) {
            probe.loads[0] = grid_point(l0_max, a, resolution);
            for (int b = 0; b <= resolution; ++b) {
                probe.loads[1] = grid_point(l1_max, b, resolution);
                if (!detail::power_feasible(sc, probe)) continue;
                const double v = group_objective(sc, probe);
                if (v < best_value) {
                    best_value = v;
                    best = probe;
                }
            }
        }
    }
    return {best, best_value};
}

}  // namespace mucc
