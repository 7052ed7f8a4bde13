#pragma once

// Behavioral model of the reconfigurable switched-capacitor converters.
//
// A stage with conversion ratio r moves charge packets q = C_eff*(r*v_in -
// v_out) per switching cycle whenever the ideal transformed input exceeds the
// output rail. Losses: charge sharing (half C_eff dv^2 per cycle), bottom
// plate switching, switch conduction, and a fixed controller overhead. The
// input charge is priced so that q_in*v_in = q_out*v_out + e_loss holds
// exactly in the model's accounting.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mewpt/pmu_config.hpp"

namespace mewpt {

struct Ratio {
    int num = 1;
    int den = 1;
    constexpr double value() const { return static_cast<double>(num) / den; }
    constexpr bool operator==(const Ratio&) const = default;
};

enum class RscStageKind { REG, STO, AUX, HV_PRE, HV_4X };

struct RscStage {
    RscStageKind kind = RscStageKind::STO;
    Ratio current_ratio{1, 1};
    RscStageKind assigned_to = RscStageKind::STO;  // AUX bank only
};

/// Legal conversion-ratio set of a stage, ascending. The buck converter
/// offers {1/4, 1/3, 1/2, 2/3, 3/4, 1}; the cross-coupled voltage adder
/// extends each ratio r to 1+r, for 12 distinct values overall.
inline std::vector<Ratio> rsc_ratio_set(RscStageKind kind, bool adder_enabled = true) {
    static const std::vector<Ratio> buck{{1, 4}, {1, 3}, {1, 2}, {2, 3}, {3, 4}, {1, 1}};
    switch (kind) {
        case RscStageKind::REG:
        case RscStageKind::STO: {
            std::vector<Ratio> set = buck;
            if (adder_enabled)
                for (const Ratio& r : buck) set.push_back({r.num + r.den, r.den});
            return set;
        }
        case RscStageKind::HV_PRE:
            return {{1, 1}, {2, 1}, {3, 1}};
        case RscStageKind::HV_4X:
            return {{4, 1}};
        case RscStageKind::AUX:
            break;
    }
    throw std::domain_error("rsc_ratio_set: AUX bank has no conversion ratios");
}

struct TransferParams {
    double ratio = 1.0;     // ideal v_out / v_in
    double c_eff_f = 0.0;   // charge moved per cycle per volt of headroom
    double c_bp_f = 0.0;    // capacitance whose bottom plate toggles each cycle
    double f_sw_hz = 10e6;
    double bottom_plate_fraction = 0.05;
    double switch_resistance_ohm = 0.0;
    double overhead_w = 0.0;
};

struct ChargeTransfer {
    double q_in_c = 0.0;
    double q_out_c = 0.0;
    double e_loss_j = 0.0;
    double cycles = 0.0;  // switching cycles actually used within dt
};

/// Charge moved over an interval dt, optionally limited to q_limit output
/// charge (hysteretic stages run only as many cycles as the rail needs).
inline ChargeTransfer charge_transfer(const TransferParams& p, double v_in, double v_out,
                                      double dt, double q_limit_c = -1.0) {
    if (!(dt > 0.0)) throw std::domain_error("charge_transfer: dt must be positive");
    ChargeTransfer t;
    if (v_in <= 0.0) return t;  // unpowered stage: no transfer, no overhead
    const double dv = p.ratio * v_in - v_out;
    if (dv <= 0.0) {
        t.e_loss_j = p.overhead_w * dt;
        t.q_in_c = t.e_loss_j / v_in;
        return t;
    }
    const double q_cycle = p.c_eff_f * dv;
    double cycles = p.f_sw_hz * dt;
    if (q_limit_c >= 0.0 && q_cycle > 0.0) cycles = std::min(cycles, q_limit_c / q_cycle);
    t.cycles = cycles;
    t.q_out_c = q_cycle * cycles;
    const double e_share = 0.5 * p.c_eff_f * dv * dv * cycles;
    const double e_bp = p.bottom_plate_fraction * p.c_bp_f * v_in * v_in * cycles;
    const double e_cond = q_cycle * q_cycle * p.f_sw_hz * p.switch_resistance_ohm * cycles;
    t.e_loss_j = e_share + e_bp + e_cond + p.overhead_w * dt;
    t.q_in_c = (t.q_out_c * v_out + t.e_loss_j) / v_in;
    return t;
}

/// Transfer parameters of a stage under a given configuration. The AUX bank
/// doubles the effective capacitance of whichever stage it is assigned to;
/// callers express that through the capacitance multiplier.
inline TransferParams stage_params(const RscStage& stage, const PmuConfig& cfg,
                                   double cap_multiplier = 1.0) {
    TransferParams p;
    p.ratio = stage.current_ratio.value();
    p.f_sw_hz = cfg.f_sw_hz;
    p.bottom_plate_fraction = cfg.bottom_plate_fraction;
    p.switch_resistance_ohm = cfg.switch_resistance_ohm;
    p.overhead_w = cfg.controller_overhead_w;
    switch (stage.kind) {
        case RscStageKind::REG:
        case RscStageKind::STO: {
            const double c = cfg.n_fly_per_stage * cfg.c_fly_f * cap_multiplier;
            p.c_eff_f = c;
            p.c_bp_f = c;
            break;
        }
        case RscStageKind::HV_PRE:
        case RscStageKind::HV_4X: {
            // pre-charge and 4x stages compose into one deep stack; the
            // effective per-cycle capacitance shrinks with the overall ratio
            const double overall = (stage.kind == RscStageKind::HV_PRE)
                                       ? 4.0 * stage.current_ratio.value()
                                       : 4.0;
            p.ratio = overall;
            p.c_eff_f = cfg.c_fly_hv_f / overall;
            p.c_bp_f = cfg.c_fly_hv_f;
            p.overhead_w = 2.0 * cfg.controller_overhead_w;  // two stages switching
            break;
        }
        case RscStageKind::AUX:
            throw std::domain_error("stage_params: AUX bank does not transfer charge");
    }
    return p;
}

/// Charge moved by one stage over dt at full rate.
inline ChargeTransfer rsc_transfer(const RscStage& stage, double v_in, double v_out, double dt,
                                   const PmuConfig& cfg) {
    return charge_transfer(stage_params(stage, cfg), v_in, v_out, dt);
}

}  // namespace mewpt
