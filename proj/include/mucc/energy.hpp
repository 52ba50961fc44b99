#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mucc/model.hpp"

namespace mucc {

// One cooperation group: a provider (rp) and the demanders offloading to it.
// loads[i] is the number of bits members[i] transfers to the provider this
// slot; loads align with members.
struct GroupLoads {
    int rp = -1;
    std::vector<int> members;
    std::vector<double> loads;

    std::size_t count() const { return members.size(); }
    double total_load() const {
        double s = 0.0;
        for (double l : loads) s += l;
        return s;
    }

    void validate(const Scenario& sc) const {
        check_arg(rp >= 0 && rp < sc.size(), "group provider id out of range");
        check_arg(members.size() == loads.size(), "loads must align with members");
        check_arg(static_cast<int>(members.size()) <= sc.ue(rp).quota,
                  "group exceeds provider quota");
        for (std::size_t i = 0; i < members.size(); ++i) {
            const int id = members[i];
            check_arg(id >= 0 && id < sc.size() && id != rp, "bad group member id");
            check_arg(loads[i] >= 0.0 && loads[i] <= sc.ue(id).task_bits,
                      "offload outside [0, task_bits]");
            for (std::size_t j = i + 1; j < members.size(); ++j)
                check_arg(members[j] != id, "duplicate group member");
        }
    }
};

// DVFS compute energy for processing `bits` within one slot: the CPU runs at
// exactly the frequency that finishes on time, so energy is cubic in bits.
inline double dvfs_energy(double cap_coeff, double cycles_per_bit, double bits,
                          double slot_seconds) {
    const double c3 = cycles_per_bit * cycles_per_bit * cycles_per_bit;
    const double b3 = bits * bits * bits;
    return cap_coeff * c3 * b3 / (slot_seconds * slot_seconds);
}

// Energy a UE spends completing its whole task locally.
inline double standalone_energy(const UeProfile& ue, double slot_seconds) {
    check_arg(slot_seconds > 0.0, "slot_seconds must be > 0");
    return dvfs_energy(ue.cap_coeff, ue.cycles_per_bit, ue.task_bits, slot_seconds);
}

// Minimum transmit power for member i of a NOMA cooperation group to deliver
// its load within the slot: the single-user water level for its own bits,
// raised by the co-served members' aggregate load.
inline double tx_power(const GroupLoads& g, std::size_t member_pos,
                       const ChannelGains& gains, const SystemParams& params) {
    require(member_pos < g.count(), "member position out of range");
    const double tw = params.slot_bandwidth_product();
    const double own = g.loads[member_pos];
    double others = 0.0;
    for (std::size_t n = 0; n < g.count(); ++n)
        if (n != member_pos) others += g.loads[n];
    const double n0 = params.noise_power_w / gains(g.members[member_pos], g.rp);
    return n0 * exp2m1(own / tw) * std::exp2(others / tw);
}

// Same quantity written as a difference of exponentials of the group's total
// and residual loads. Kept as an independent algebraic route for testing;
// evaluated in extended precision because the literal subtraction cancels
// for small own loads.
inline double tx_power_difference_form(const GroupLoads& g, std::size_t member_pos,
                                       const ChannelGains& gains,
                                       const SystemParams& params) {
    require(member_pos < g.count(), "member position out of range");
    const long double tw = params.slot_bandwidth_product();
    long double total = 0.0L;
    for (double l : g.loads) total += l;
    const long double others = total - g.loads[member_pos];
    const long double n0 = params.noise_power_w / gains(g.members[member_pos], g.rp);
    return static_cast<double>(n0 * (std::exp2(total / tw) - std::exp2(others / tw)));
}

inline double tx_energy(double power_w, double slot_seconds) {
    check_arg(power_w >= 0.0, "negative transmit power");
    return power_w * slot_seconds;
}

// Provider compute energy: its own task plus everything offloaded to it.
inline double rp_energy(const UeProfile& rp, const GroupLoads& g, double slot_seconds) {
    return dvfs_energy(rp.cap_coeff, rp.cycles_per_bit, rp.task_bits + g.total_load(),
                       slot_seconds);
}

// Demander compute energy for the bits it keeps.
inline double rd_local_energy(const UeProfile& rd, double offloaded_bits,
                              double slot_seconds) {
    check_arg(offloaded_bits >= 0.0 && offloaded_bits <= rd.task_bits,
              "offloaded bits outside [0, task_bits]");
    return dvfs_energy(rd.cap_coeff, rd.cycles_per_bit, rd.task_bits - offloaded_bits,
                       slot_seconds);
}

// Demander total: remaining local compute plus the uplink transfer.
inline double rd_total_energy(const UeProfile& rd, const GroupLoads& g,
                              std::size_t member_pos, const ChannelGains& gains,
                              const SystemParams& params) {
    const double local = rd_local_energy(rd, g.loads[member_pos], params.slot_seconds);
    const double p = tx_power(g, member_pos, gains, params);
    return local + tx_energy(p, params.slot_seconds);
}

// Rate member i achieves at its minimum transmit power. Interference is the
// residual left by successive interference cancellation, which for the power
// levels above equals noise scaled by the co-served members' aggregate load;
// at those powers the achieved rate meets the member's per-slot requirement
// exactly.
inline double achievable_rate(const GroupLoads& g, std::size_t member_pos,
                              const ChannelGains& gains, const SystemParams& params) {
    require(member_pos < g.count(), "member position out of range");
    const double tw = params.slot_bandwidth_product();
    double others = 0.0;
    for (std::size_t n = 0; n < g.count(); ++n)
        if (n != member_pos) others += g.loads[n];
    const double p = tx_power(g, member_pos, gains, params);
    const double gain = gains(g.members[member_pos], g.rp);
    const double interference_plus_noise = params.noise_power_w * std::exp2(others / tw);
    return params.bandwidth_hz * std::log2(1.0 + p * gain / interference_plus_noise);
}

// Total energy of every UE in the scenario under the given cooperation
// plans. UEs absent from every plan compute their tasks locally.
inline double system_energy(const std::vector<GroupLoads>& plans, const Scenario& sc) {
    std::vector<char> covered(static_cast<std::size_t>(sc.size()), 0);
    double total = 0.0;
    for (const GroupLoads& g : plans) {
        g.validate(sc);
        require(!covered[static_cast<std::size_t>(g.rp)], "UE appears in two plans");
        covered[static_cast<std::size_t>(g.rp)] = 1;
        total += rp_energy(sc.ue(g.rp), g, sc.params.slot_seconds);
        for (std::size_t i = 0; i < g.count(); ++i) {
            const int id = g.members[i];
            require(!covered[static_cast<std::size_t>(id)], "UE appears in two plans");
            covered[static_cast<std::size_t>(id)] = 1;
            total += rd_total_energy(sc.ue(id), g, i, sc.channels, sc.params);
        }
    }
    for (int m = 0; m < sc.size(); ++m)
        if (!covered[static_cast<std::size_t>(m)])
            total += standalone_energy(sc.ue(m), sc.params.slot_seconds);
    return total;
}

}  // namespace mucc
