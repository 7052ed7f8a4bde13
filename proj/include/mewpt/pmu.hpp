#pragma once

// Control state of the PMU and the three finite state machines: skewed-duty
// MPPT on the storage-stage conversion ratio, the regulation-efficiency
// optimizer on the REG-stage ratio, and the adaptive high-voltage charger.
// Plus the quasi-static coupling between the rectifier interface analysis and
// the converter load line.

#include <cmath>
#include <functional>
#include <numbers>

#include "mewpt/bvd.hpp"
#include "mewpt/pmu_config.hpp"
#include "mewpt/rectifier.hpp"
#include "mewpt/rsc.hpp"

namespace mewpt {

enum class PmuMode { STARTUP, NORMAL_MPPT, STORAGE_REUSE };

inline constexpr const char* to_string(PmuMode m) {
    switch (m) {
        case PmuMode::STARTUP: return "STARTUP";
        case PmuMode::NORMAL_MPPT: return "NORMAL_MPPT";
        case PmuMode::STORAGE_REUSE: return "STORAGE_REUSE";
    }
    return "?";
}

struct PmuState {
    PmuMode mode = PmuMode::STARTUP;
    bool hv_active = false;  // HV charging overlays either powered mode

    double v_rect_v = 0.0;
    double v_reg_v = 0.0;
    double v_sto_v = 0.0;
    double v_hv_v = 0.0;
    double v_ldo_v = 0.0;

    double duty_filtered = 0.0;  // RC-filtered WD_RECT
    double reg_en_duty = 0.0;    // duty monitor output over the last tuning window

    int cr_sto_index = 0;  // indices into the ascending 12-ratio set
    int cr_reg_index = 0;
    int cr_hv = 4;  // composed HV ratio: 4, 8 or 12

    bool flag_eta_low = false;
    bool drop_vreg = false;
    bool por = false;
    bool sto_full = false;

    double clock_s = 0.0;
};

// ---------------------------------------------------------------------------
// SD-MPPT: compare the filtered rectification duty against the reference
// window. Duty below the window means the interface sits above the matched
// impedance: step to the next larger ratio to draw more power (which lowers
// V_RECT and raises the duty), and vice versa. Saturates at the set bounds.
// Call cadence (once per t_wait_sto) is the caller's responsibility.
// ---------------------------------------------------------------------------
inline int mppt_fsm_step(const PmuState& st, const PmuConfig& cfg) {
    const int last = cfg.adder_enabled_sto ? 11 : 5;
    if (st.duty_filtered < cfg.duty_window_low) return std::min(st.cr_sto_index + 1, last);
    if (st.duty_filtered > cfg.duty_window_high) return std::max(st.cr_sto_index - 1, 0);
    return st.cr_sto_index;
}

// ---------------------------------------------------------------------------
// Regulation-efficiency optimizer: a low REG_EN duty means the stage is
// oversized for the moment (large per-cycle headroom, poor efficiency), so
// the ratio is lowered. A V_REG droop always wins and raises the ratio.
// ---------------------------------------------------------------------------
inline int reg_optimizer_step(const PmuState& st, const PmuConfig& cfg) {
    const int last = cfg.adder_enabled_reg ? 11 : 5;
    if (st.drop_vreg) return std::min(st.cr_reg_index + 1, last);
    if (st.flag_eta_low) return std::max(st.cr_reg_index - 1, 0);
    return st.cr_reg_index;
}

/// Composed HV conversion ratio for an output voltage: the 1x/2x/3x
/// pre-charge stage ahead of the fixed 4x stage gives 4x, 8x or 12x, stepped
/// up as V_HV crosses the configured thresholds.
inline int hv_ratio_for(double v_hv, const PmuConfig& cfg) {
    if (v_hv > cfg.hv_threshold_hi_v) return 12;
    if (v_hv > cfg.hv_threshold_lo_v) return 8;
    return 4;
}

struct HvStepResult {
    double v_hv_v = 0.0;
    int cr_hv = 4;
    double q_in_c = 0.0;
    double e_in_j = 0.0;      // drawn from the supply rail
    double e_stored_j = 0.0;  // exact capacitor energy gain
    double e_loss_j = 0.0;
    bool done = false;
};

/// One envelope step of the adaptive HV charger. The supply rail is
/// state.v_rect (which equals V_STO in storage-reuse mode). Charging stops
/// exactly at the target voltage.
inline HvStepResult hv_charge_step(const PmuState& st, const PmuConfig& cfg, double dt) {
    if (cfg.v_hv_target_v > 12.0)
        throw input_error("hv_charge_step: v_hv_target above the 12 V compliance limit");
    HvStepResult r;
    r.v_hv_v = st.v_hv_v;
    r.cr_hv = hv_ratio_for(st.v_hv_v, cfg);
    if (st.v_hv_v >= cfg.v_hv_target_v) {
        r.done = true;
        return r;
    }
    RscStage pre{RscStageKind::HV_PRE, {r.cr_hv / 4, 1}, RscStageKind::STO};
    const TransferParams params = stage_params(pre, cfg);
    // 12.6 V compliance guard on top of the programmed target
    const double ceiling = std::min(cfg.v_hv_target_v, 12.6);
    const double q_to_target = (ceiling - st.v_hv_v) * cfg.c_hv_f;
    const ChargeTransfer t =
        charge_transfer(params, st.v_rect_v, st.v_hv_v, dt, q_to_target);
    r.q_in_c = t.q_in_c;
    r.e_in_j = t.q_in_c * st.v_rect_v;
    r.v_hv_v = st.v_hv_v + t.q_out_c / cfg.c_hv_f;
    r.e_stored_j = 0.5 * cfg.c_hv_f * (r.v_hv_v * r.v_hv_v - st.v_hv_v * st.v_hv_v);
    r.e_loss_j = r.e_in_j - r.e_stored_j;
    r.done = r.v_hv_v >= cfg.v_hv_target_v - 1e-12;
    return r;
}

/// Mode selection. POR gates everything; with POR high the system runs from
/// the rectifier while input power is present and from the supercapacitor
/// otherwise. Input-power presence detection (brownout debounce) is the
/// caller's job. The STO stage pauses at v_sto_full to prevent overvoltage.
struct ModeDecision {
    PmuMode mode = PmuMode::STARTUP;
    bool por = false;
    bool sto_full = false;
};

inline ModeDecision mode_controller_step(const PmuState& st, const PmuConfig& cfg,
                                         bool input_power_available) {
    ModeDecision d;
    d.por = st.v_ldo_v >= cfg.por_threshold_v;
    d.sto_full = st.v_sto_v >= cfg.v_sto_full_v;
    if (!d.por)
        d.mode = PmuMode::STARTUP;
    else if (input_power_available)
        d.mode = PmuMode::NORMAL_MPPT;
    else
        d.mode = PmuMode::STORAGE_REUSE;
    return d;
}

// ---------------------------------------------------------------------------
// Rectifier/converter equilibrium: find the conduction angle at which the
// rectifier's available DC output current equals the converters' demanded
// input current at the resulting V_RECT. The available current has the
// closed form i(theta) = I_0(theta) * (1 + cos theta) / pi.
// ---------------------------------------------------------------------------
struct EquilibriumResult {
    OperatingPoint op;
    bool brownout = false;
};

inline EquilibriumResult rectifier_equilibrium(
    const BvdModel& m, double omega, const std::function<double(double)>& converter_demand_a,
    double tol_a = 1e-9) {
    const double pi = std::numbers::pi;
    auto imbalance = [&](double theta) {
        const OperatingPoint op = operating_point(m, omega, theta);
        const double i_avail = op.i_0_a * (1.0 + std::cos(theta)) / pi;
        return i_avail - converter_demand_a(op.v_rect_v);
    };

    // scan from the open-circuit end for the first supply-excess bracket
    constexpr int kScan = 128;
    double hi = pi;
    double lo = hi, g_lo = imbalance(hi);
    bool bracketed = g_lo >= 0.0;
    for (int k = kScan - 1; k >= 0 && !bracketed; --k) {
        hi = lo;
        lo = pi * k / kScan;
        g_lo = imbalance(lo);
        bracketed = g_lo >= 0.0;
    }
    EquilibriumResult res;
    if (!bracketed) {
        // demand exceeds supply everywhere: collapse sentinel
        res.op = operating_point(m, omega, 0.0);
        res.brownout = true;
        return res;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = imbalance(mid);
        if (std::abs(g) < tol_a) {
            lo = hi = mid;
            break;
        }
        if (g >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    res.op = operating_point(m, omega, 0.5 * (lo + hi));
    return res;
}

}  // namespace mewpt
