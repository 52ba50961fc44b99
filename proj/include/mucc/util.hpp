#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mucc {

// Internal invariant check. Stays on in release builds; a trip is a defect,
// not a recoverable condition.
inline void require(bool cond, const char* what) {
    if (!cond) throw std::logic_error(std::string("invariant violated: ") + what);
}

inline void check_arg(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

// ---------------------------------------------------------------------------
// Deterministic random draws. std::mt19937_64 is seed-stable across
// platforms; the distribution helpers below avoid std::*_distribution,
// whose output is implementation-defined.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

// Uniform in (0,1), never exactly 0 or 1.
inline double uniform_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_open(rng);
}

// Unit-mean exponential draw, strictly positive.
inline double exponential_unit_mean(Rng& rng) {
    return -std::log(uniform_open(rng));
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    // n is tiny in this codebase; modulo bias is irrelevant but cheap to avoid.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
    }
}

// ---------------------------------------------------------------------------
// 1-D solvers
// ---------------------------------------------------------------------------

struct Minimum1d {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section minimization of a unimodal function on [lo, hi].
// The bracket shrinks below x_tol; the returned point is the best evaluated.
template <typename F>
Minimum1d golden_section_minimize(F&& f, double lo, double hi, double x_tol) {
    require(hi >= lo, "golden section needs hi >= lo");
    if (hi - lo <= x_tol) {
        const double xm = 0.5 * (lo + hi);
        return {xm, f(xm)};
    }
    constexpr double inv_phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > x_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    // Compare the surviving interior points with the endpoints of the
    // original interval; endpoint minima (x*=lo or x*=hi) are common here.
    Minimum1d best = (f1 <= f2) ? Minimum1d{x1, f1} : Minimum1d{x2, f2};
    const double flo = f(lo), fhi = f(hi);
    if (flo < best.value) best = {lo, flo};
    if (fhi < best.value) best = {hi, fhi};
    return best;
}

// Bisection for the root of a strictly increasing function on [lo, hi].
// Requires f(lo) <= 0 <= f(hi); converges to rel_tol on x.
template <typename F>
double bisect_increasing(F&& f, double lo, double hi, double rel_tol) {
    double flo = f(lo);
    double fhi = f(hi);
    require(flo <= 0.0 && fhi >= 0.0, "bisection bracket does not straddle root");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    while (hi - lo > rel_tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Small statistics / formatting helpers
// ---------------------------------------------------------------------------

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Standard error of the mean.
inline double stderr_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

// 2^x - 1 without cancellation for small x. The exp2 branch keeps integer
// exponents exact.
inline double exp2m1(double x) {
    constexpr double ln2 = 0.693147180559945309417232121458;
    return x >= 0.5 ? std::exp2(x) - 1.0 : std::expm1(x * ln2);
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
    const double diff = std::abs(a - b);
    return diff <= abs_floor + rel * std::max(std::abs(a), std::abs(b));
}

// Shortest exact decimal for CSV output; %.17g round-trips binary64.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace mucc
