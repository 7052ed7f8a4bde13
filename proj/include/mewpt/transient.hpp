#pragma once

// Brute-force time-domain validator for the rectifier interface analysis.
// Integrates the circuit ODEs with a fixed-step RK4 scheme and an ideal
// full-bridge whose conduction state is evaluated once per step.
//
// Two drive modes:
//   sinusoidal_current - I_P = I_0 sin(wt) injected into C_P. This is the
//     assumption behind the closed forms, so results must match them tightly.
//   full_bvd - the internal source drives the complete motional branch; the
//     difference from the closed forms measures the fundamental-tone
//     approximation error.
//
// Two load kinds: a resistor with a smoothing capacitor, or an ideal DC sink
// that pins the rectifier output voltage.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "mewpt/bvd.hpp"
#include "mewpt/errors.hpp"

namespace mewpt {

enum class DriveMode { sinusoidal_current, full_bvd };

struct OracleLoad {
    enum class Kind { resistor, dc_sink } kind = Kind::resistor;
    double value = 0.0;  // ohms or volts

    static OracleLoad resistor(double r_ohm) { return {Kind::resistor, r_ohm}; }
    static OracleLoad dc_sink(double v) { return {Kind::dc_sink, v}; }
};

struct OracleOptions {
    int n_cycles = 800;
    int steps_per_cycle = 1000;
    DriveMode drive = DriveMode::sinusoidal_current;
    double i_0_a = 0.0;        // required in sinusoidal_current mode
    double c_rect_f = 0.0;     // 0 = auto-size (resistor load: R*C = 80 carrier periods)
    double diode_drop_v = 0.0; // per-diode forward drop (two in the conduction path)
    double drift_tol = 1e-4;   // max relative cycle-to-cycle drift of mean v_rect
};

struct OracleResult {
    double v_rect_avg_v = 0.0;
    double p_out_avg_w = 0.0;
    double duty_rect = 0.0;
};

inline OracleResult transient_oracle(const BvdModel& m, double omega, const OracleLoad& load,
                                     const OracleOptions& opt) {
    if (!(omega > 0.0)) throw std::domain_error("transient_oracle: omega must be positive");
    if (opt.steps_per_cycle < 200)
        throw std::invalid_argument("transient_oracle: steps_per_cycle must be >= 200");
    if (opt.n_cycles < 50) throw std::invalid_argument("transient_oracle: n_cycles must be >= 50");
    const bool sin_drive = opt.drive == DriveMode::sinusoidal_current;
    if (sin_drive && !(opt.i_0_a > 0.0))
        throw std::invalid_argument("transient_oracle: sinusoidal_current mode requires i_0");
    const bool resistive = load.kind == OracleLoad::Kind::resistor;
    if (resistive && !(load.value > 0.0))
        throw std::domain_error("transient_oracle: load resistance must be positive");
    if (!resistive && !(load.value >= 0.0))
        throw std::domain_error("transient_oracle: sink voltage must be non-negative");

    const double period = 2.0 * std::numbers::pi / omega;
    const double h = period / opt.steps_per_cycle;
    const double r_l = resistive ? load.value : 0.0;
    const double c_rect =
        resistive ? (opt.c_rect_f > 0.0 ? opt.c_rect_f : 80.0 * period / r_l) : 0.0;
    const double vd2 = 2.0 * opt.diode_drop_v;

    enum class Conduction { off, pos, neg };
    Conduction cond = Conduction::off;

    // State: [i_l, v_cm, v_ac, v_rect]. In sinusoidal mode i_l/v_cm are unused.
    double i_l = 0.0, v_cm = 0.0, v_ac = 0.0;
    double v_rect = resistive ? 0.0 : load.value;

    auto drive_current = [&](double t, double il) {
        return sin_drive ? opt.i_0_a * std::sin(omega * t) : il;
    };

    // Derivatives of the motional branch given the AC node voltage.
    auto motional_dot = [&](double t, double il, double vcm, double vac, double& dil,
                            double& dvcm) {
        const double vs = m.v_s_amp_v * std::sin(omega * t);
        dil = (vs - m.r_m_ohm * il - vcm - vac) / m.l_m_h;
        dvcm = il / m.c_m_f;
    };

    // Derivatives in the current conduction mode; x = {i_l, v_cm, v_ac, v_rect}.
    auto deriv = [&](double t, const double* x, double* dx) {
        const double il = x[0], vcm = x[1];
        double dil = 0.0, dvcm = 0.0;
        if (!sin_drive) {
            // during conduction the AC node rides the DC rail
            const double vac = (cond == Conduction::off)   ? x[2]
                               : (cond == Conduction::pos) ? x[3] + vd2
                                                           : -(x[3] + vd2);
            motional_dot(t, il, vcm, vac, dil, dvcm);
        }
        dx[0] = dil;
        dx[1] = dvcm;
        const double idrv = drive_current(t, il);
        if (cond == Conduction::off) {
            dx[2] = idrv / m.c_p_f;                                  // v_ac
            dx[3] = resistive ? -x[3] / (r_l * c_rect) : 0.0;        // v_rect decays
        } else {
            const double sgn = (cond == Conduction::pos) ? 1.0 : -1.0;
            if (resistive) {
                dx[2] = 0.0;  // unused while conducting
                dx[3] = (sgn * idrv - x[3] / r_l) / (m.c_p_f + c_rect);
            } else {
                dx[2] = 0.0;
                dx[3] = 0.0;
            }
        }
    };

    auto dc_current = [&](double t, double il, double vrect) {
        const double idrv = drive_current(t, il);
        if (cond == Conduction::off) return 0.0;
        const double sgn = (cond == Conduction::pos) ? 1.0 : -1.0;
        if (resistive)
            return (c_rect * sgn * idrv + m.c_p_f * vrect / r_l) / (m.c_p_f + c_rect);
        return sgn * idrv;
    };

    const int total_steps = opt.n_cycles * opt.steps_per_cycle;
    const int avg_start = (opt.n_cycles - std::max(1, opt.n_cycles / 5)) * opt.steps_per_cycle;

    double sum_vrect = 0.0, sum_pout = 0.0, cond_time = 0.0, avg_time = 0.0;
    double cycle_vrect_prev = -1.0, cycle_vrect_acc = 0.0;
    double drift = 0.0;

    double x[4] = {i_l, v_cm, v_ac, v_rect};
    for (int step = 0; step < total_steps; ++step) {
        const double t = step * h;
        const bool in_avg = step >= avg_start;

        const double idc0 = dc_current(t, x[0], x[3]);
        if (in_avg) {
            sum_vrect += x[3] * h;
            sum_pout += (resistive ? x[3] * x[3] / r_l : load.value * idc0) * h;
            avg_time += h;
        }

        double k1[4], k2[4], k3[4], k4[4], xt[4];
        deriv(t, x, k1);
        for (int i = 0; i < 4; ++i) xt[i] = x[i] + 0.5 * h * k1[i];
        deriv(t + 0.5 * h, xt, k2);
        for (int i = 0; i < 4; ++i) xt[i] = x[i] + 0.5 * h * k2[i];
        deriv(t + 0.5 * h, xt, k3);
        for (int i = 0; i < 4; ++i) xt[i] = x[i] + h * k3[i];
        deriv(t + h, xt, k4);
        double xprev[4] = {x[0], x[1], x[2], x[3]};
        for (int i = 0; i < 4; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        // conduction-state logic, once per step
        if (cond == Conduction::off) {
            const double clamp = x[3] + vd2;
            if (x[2] >= clamp) {
                // fraction of the step spent conducting (linear crossing estimate)
                const double before = xprev[2] - (xprev[3] + vd2);
                const double after = x[2] - clamp;
                const double lam = (after > before) ? std::clamp(-before / (after - before), 0.0, 1.0) : 1.0;
                if (in_avg) cond_time += (1.0 - lam) * h;
                cond = Conduction::pos;
                if (resistive)
                    x[3] = (m.c_p_f * (x[2] - vd2) + c_rect * x[3]) / (m.c_p_f + c_rect);
                x[2] = x[3] + vd2;
            } else if (x[2] <= -clamp) {
                const double before = -(xprev[3] + vd2) - xprev[2];
                const double after = -clamp - x[2];
                const double lam = (after > before) ? std::clamp(-before / (after - before), 0.0, 1.0) : 1.0;
                if (in_avg) cond_time += (1.0 - lam) * h;
                cond = Conduction::neg;
                if (resistive)
                    x[3] = (m.c_p_f * (-x[2] - vd2) + c_rect * x[3]) / (m.c_p_f + c_rect);
                x[2] = -(x[3] + vd2);
            }
        } else {
            if (in_avg) cond_time += h;
            const double idc1 = dc_current(t + h, x[0], x[3]);
            if (idc1 < 0.0) {
                // back out the overshoot fraction from the duty accumulator
                const double lam = (idc0 > idc1) ? std::clamp(idc0 / (idc0 - idc1), 0.0, 1.0) : 0.0;
                if (in_avg) cond_time -= (1.0 - lam) * h;
                x[2] = (cond == Conduction::pos) ? x[3] + vd2 : -(x[3] + vd2);
                cond = Conduction::off;
            } else if (cond == Conduction::pos) {
                x[2] = x[3] + vd2;
            } else {
                x[2] = -(x[3] + vd2);
            }
        }

        cycle_vrect_acc += x[3];
        if ((step + 1) % opt.steps_per_cycle == 0) {
            const double mean = cycle_vrect_acc / opt.steps_per_cycle;
            if (cycle_vrect_prev >= 0.0) {
                const double ref = std::max(std::abs(mean), 1e-12);
                drift = std::abs(mean - cycle_vrect_prev) / ref;
            }
            cycle_vrect_prev = mean;
            cycle_vrect_acc = 0.0;
        }
    }

    if (drift > opt.drift_tol) {
        std::ostringstream os;
        os << "transient_oracle: steady state not reached, cycle-to-cycle drift " << drift
           << " > " << opt.drift_tol << " after " << opt.n_cycles << " cycles";
        throw oracle_error(os.str());
    }

    OracleResult res;
    res.v_rect_avg_v = sum_vrect / avg_time;
    res.p_out_avg_w = sum_pout / avg_time;
    res.duty_rect = cond_time / avg_time;
    return res;
}

}  // namespace mewpt
