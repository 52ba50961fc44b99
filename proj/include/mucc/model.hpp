#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mucc/util.hpp"

namespace mucc {

// System-wide constants for one simulated slot.
struct SystemParams {
    double slot_seconds = 0.2;       // slot length tau
    double bandwidth_hz = 1e6;       // per-group uplink channel width w
    double noise_power_w = 1e-9;     // receiver noise sigma^2
    double pathloss_exponent = 3.0;  // distance power-scaling beta
    double area_side_m = 100.0;      // square deployment area side
    double coop_epsilon_j = 1e-9;    // minimum pair saving to be worth listing
    std::uint64_t rng_seed = 1;

    double slot_bandwidth_product() const { return slot_seconds * bandwidth_hz; }

    void validate() const {
        check_arg(slot_seconds > 0.0, "slot_seconds must be > 0");
        check_arg(bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
        check_arg(noise_power_w > 0.0, "noise_power_w must be > 0");
        check_arg(pathloss_exponent >= 2.0, "pathloss_exponent must be >= 2");
        check_arg(area_side_m > 0.0, "area_side_m must be > 0");
        check_arg(coop_epsilon_j >= 0.0, "coop_epsilon_j must be >= 0");
    }
};

// One device. Task size and CPU parameters drive the DVFS energy model;
// quota bounds how many demanders it may serve when acting as a provider.
struct UeProfile {
    int id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double task_bits = 0.0;           // L: data to process this slot
    double cycles_per_bit = 500.0;    // C: CPU cycles per task bit
    double cap_coeff = 1e-28;         // gamma: effective capacitance coefficient
    double max_tx_power_w = 0.1;      // uplink power cap
    int quota = 2;                    // max demanders served as provider
    double available_energy_j = 1e3;  // battery budget
    double energy_threshold_j = 0.0;  // provider-eligibility floor

    void validate() const {
        check_arg(task_bits >= 0.0, "task_bits must be >= 0");
        check_arg(cycles_per_bit > 0.0, "cycles_per_bit must be > 0");
        check_arg(cap_coeff > 0.0, "cap_coeff must be > 0");
        check_arg(max_tx_power_w > 0.0, "max_tx_power_w must be > 0");
        check_arg(quota >= 1, "quota must be >= 1");
        check_arg(available_energy_j >= 0.0, "available_energy_j must be >= 0");
        check_arg(energy_threshold_j >= 0.0, "energy_threshold_j must be >= 0");
    }
};

// Symmetric positive pairwise power gains; the diagonal is unused.
class ChannelGains {
public:
    ChannelGains() = default;
    explicit ChannelGains(int n) : n_(n), g_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }

    double operator()(int m, int k) const {
        return g_[static_cast<std::size_t>(m) * n_ + k];
    }

    void set(int m, int k, double gain) {
        check_arg(m != k, "channel gain is defined only between distinct UEs");
        check_arg(gain > 0.0 && std::isfinite(gain), "channel gain must be finite and > 0");
        g_[static_cast<std::size_t>(m) * n_ + k] = gain;
        g_[static_cast<std::size_t>(k) * n_ + m] = gain;
    }

private:
    int n_ = 0;
    std::vector<double> g_;
};

struct Scenario {
    SystemParams params;
    std::vector<UeProfile> ues;
    ChannelGains channels;

    int size() const { return static_cast<int>(ues.size()); }

    const UeProfile& ue(int id) const { return ues[static_cast<std::size_t>(id)]; }
    double gain(int m, int k) const { return channels(m, k); }

    void validate() const {
        params.validate();
        check_arg(channels.size() == size(), "channel matrix dimension mismatch");
        for (int m = 0; m < size(); ++m) {
            const UeProfile& u = ues[static_cast<std::size_t>(m)];
            check_arg(u.id == m, "UE ids must be dense and ordered");
            u.validate();
            check_arg(u.x_m >= 0.0 && u.x_m <= params.area_side_m &&
                          u.y_m >= 0.0 && u.y_m <= params.area_side_m,
                      "UE position outside deployment area");
            for (int k = m + 1; k < size(); ++k) {
                const double g = channels(m, k);
                check_arg(g > 0.0 && std::isfinite(g), "channel gains must be finite and > 0");
            }
        }
    }
};

// Distance-law channel gain with an exponential fading draw.
inline double channel_gain(double distance_m, double pathloss_exponent, double fading) {
    check_arg(distance_m > 0.0, "coincident UEs: distance must be > 0");
    check_arg(fading > 0.0, "fading draw must be > 0");
    return fading / std::pow(distance_m, pathloss_exponent);
}

// Hardware/battery template applied to every generated UE. Battery fields
// default to an inactive eligibility constraint; experiments override them.
struct UeDefaults {
    double cycles_per_bit = 500.0;
    double cap_coeff = 1e-28;
    double max_tx_power_w = 0.1;
    int quota = 2;
    double available_energy_j = 1e3;
    double energy_threshold_j = 0.0;
};

// Draw a scenario: positions uniform on the square, task sizes uniform over
// the given range, pairwise gains from the distance law with unit-mean
// exponential fading. Fully determined by params.rng_seed. Pair distances
// are clamped below at 1 m so near-coincident UEs cannot produce unbounded
// gains.
inline Scenario generate_scenario(const SystemParams& params, int n,
                                  std::pair<double, double> task_bits_range,
                                  const UeDefaults& defaults = {}) {
    params.validate();
    check_arg(n >= 1, "scenario needs at least one UE");
    check_arg(task_bits_range.first >= 0.0 && task_bits_range.first <= task_bits_range.second,
              "task bits range must satisfy 0 <= min <= max");

    constexpr double kMinPairDistanceM = 1.0;

    Scenario s;
    s.params = params;
    s.ues.resize(static_cast<std::size_t>(n));
    s.channels = ChannelGains(n);

    Rng rng(params.rng_seed);
    for (int m = 0; m < n; ++m) {
        UeProfile& u = s.ues[static_cast<std::size_t>(m)];
        u.id = m;
        u.x_m = uniform_in(rng, 0.0, params.area_side_m);
        u.y_m = uniform_in(rng, 0.0, params.area_side_m);
        u.cycles_per_bit = defaults.cycles_per_bit;
        u.cap_coeff = defaults.cap_coeff;
        u.max_tx_power_w = defaults.max_tx_power_w;
        u.quota = defaults.quota;
        u.available_energy_j = defaults.available_energy_j;
        u.energy_threshold_j = defaults.energy_threshold_j;
    }
    for (int m = 0; m < n; ++m) {
        s.ues[static_cast<std::size_t>(m)].task_bits =
            uniform_in(rng, task_bits_range.first, task_bits_range.second);
    }
    for (int m = 0; m < n; ++m) {
        for (int k = m + 1; k < n; ++k) {
            const UeProfile& a = s.ues[static_cast<std::size_t>(m)];
            const UeProfile& b = s.ues[static_cast<std::size_t>(k)];
            const double d = std::max(std::hypot(a.x_m - b.x_m, a.y_m - b.y_m),
                                      kMinPairDistanceM);
            s.channels.set(m, k, channel_gain(d, params.pathloss_exponent,
                                              exponential_unit_mean(rng)));
        }
    }
    return s;
}

}  // namespace mucc
