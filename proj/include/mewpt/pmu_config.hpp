#pragma once

// Static configuration of the simulated power management unit. Values the
// hardware exposes as programmable (duty window, tuning intervals, thresholds,
// HV target) and behavioral-model coefficients (loss parameters, rail
// capacitances) all live here.

#include <array>
#include <cmath>

#include "mewpt/errors.hpp"

namespace mewpt {

struct PmuConfig {
    // converter hardware
    double c_fly_f = 83e-12;      // per flying capacitor
    int n_fly_per_stage = 2;      // REG/STO/AUX banks have equal capacitance
    double c_fly_hv_f = 83e-12;   // HV charger flying capacitance
    double f_sw_hz = 10e6;        // switching clock, programmable 5..11 MHz
    bool adder_enabled_reg = true;
    bool adder_enabled_sto = true;

    // loss model coefficients
    double bottom_plate_fraction = 0.005;
    double switch_resistance_ohm = 2.0;
    double controller_overhead_w = 1e-6;  // per running stage

    // SD-MPPT
    double duty_window_low = 0.50;
    double duty_window_high = 0.56;
    double t_wait_sto_s = 2e-3;
    double duty_filter_tau_s = 50.0 / 350e3;  // passive RC on WD_RECT, ~50 carrier periods

    // regulation stage / efficiency optimizer
    double t_wait_reg_s = 0.5e-3;
    int eta_th_code = 2;  // 2-bit REG_EN duty threshold, see eta_th()
    double v_reg_target_v = 1.0;
    double v_reg_hyst_v = 0.025;
    double v_drop_ref_v = 0.95;
    double c_reg_f = 1e-6;

    // storage
    double c_sto_f = 1e-3;
    double sto_esr_ohm = 5.0;
    double v_sto_full_v = 1.5;

    // HV charging
    double c_hv_f = 100e-9;
    double v_hv_target_v = 12.0;  // programmable 2.7..12 V
    double hv_threshold_lo_v = 3.6;
    double hv_threshold_hi_v = 7.2;

    // startup and supervision
    double por_threshold_v = 0.8;
    double v_ldo_target_v = 0.9;
    double c_ldo_f = 100e-9;
    double i_ldo_charge_a = 50e-6;
    double brownout_v = 0.3;
    double brownout_debounce_s = 50e-6;

    // boot state of the ratio FSMs (indices into the ascending 12-ratio set)
    int cr_sto_boot_index = 4;   // 3/4
    int cr_reg_boot_index = 11;  // 2

    double eta_th() const {
        constexpr std::array<double, 4> codes{0.25, 0.50, 0.75, 0.90};
        return codes[static_cast<std::size_t>(eta_th_code & 3)];
    }

    void validate() const {
        if (!(duty_window_low > 0.0 && duty_window_high < 1.0 &&
              duty_window_low < duty_window_high))
            throw input_error("PmuConfig: duty window must satisfy 0 < low < high < 1");
        if (!(hv_threshold_lo_v < hv_threshold_hi_v))
            throw input_error("PmuConfig: HV thresholds must be strictly increasing");
        if (!(v_hv_target_v <= 12.0 && v_hv_target_v >= 0.0))
            throw input_error("PmuConfig: v_hv_target must be within [0, 12] V");
        if (!(f_sw_hz >= 5e6 && f_sw_hz <= 11e6))
            throw input_error("PmuConfig: f_sw must be within [5, 11] MHz");
        for (double c : {c_fly_f, c_fly_hv_f, c_reg_f, c_sto_f, c_hv_f, c_ldo_f})
            if (!(c > 0.0)) throw input_error("PmuConfig: capacitances must be positive");
        for (double t : {t_wait_sto_s, t_wait_reg_s, duty_filter_tau_s, brownout_debounce_s})
            if (!(t > 0.0)) throw input_error("PmuConfig: intervals must be positive");
        if (eta_th_code < 0 || eta_th_code > 3)
            throw input_error("PmuConfig: eta_th_code is a 2-bit value");
        if (cr_sto_boot_index < 0 || cr_sto_boot_index > 11 || cr_reg_boot_index < 0 ||
            cr_reg_boot_index > 11)
            throw input_error("PmuConfig: boot ratio indices must be within the 12-ratio set");
    }
};

}  // namespace mewpt
