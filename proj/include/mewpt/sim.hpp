#pragma once

// Quasi-static envelope simulation of the full PMU. The 350 kHz carrier is
// never time-stepped: each envelope step solves the rectifier/converter
// equilibrium with the phasor interface analysis and moves aggregated charge
// packets through the switched-capacitor stages. Control dynamics (tuning
// intervals, the WD_RECT RC filter, mode changes) play out across steps.
//
// Energy accounting: rail receipts are priced at the step-mean capacitor
// voltage, so per-step ledger residuals reduce to the second-order
// charge-packet terms; the closing check at 0.1% of cumulative input then
// guards against real bookkeeping errors.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mewpt/bvd.hpp"
#include "mewpt/errors.hpp"
#include "mewpt/pmu.hpp"
#include "mewpt/pmu_config.hpp"
#include "mewpt/rectifier.hpp"
#include "mewpt/rsc.hpp"

namespace mewpt {

struct ScenarioStep {
    double t_start_s = 0.0;
    std::optional<double> v_s_amp_v;  // new source amplitude; power_off maps to 0
    std::optional<double> load_current_a;
    bool hv_trigger = false;
};

struct Scenario {
    std::string name = "scenario";
    BvdModel transducer;
    double freq_hz = 350e3;
    double duration_s = 0.1;
    double dt_s = 10e-6;
    int decimation = 1;
    double v_sto_init_v = 0.0;
    double v_hv_init_v = 0.0;
    double v_reg_init_v = 0.0;
    double v_ldo_init_v = 0.0;

    std::vector<ScenarioStep> schedule;

    void validate() const {
        transducer.validate();
        if (!(freq_hz > 0.0)) throw input_error("Scenario: freq_hz must be positive");
        if (!(duration_s > 0.0)) throw input_error("Scenario: duration_s must be positive");
        if (!(dt_s > 0.0) || dt_s > duration_s)
            throw input_error("Scenario: dt_s must be positive and below the duration");
        if (decimation < 1) throw input_error("Scenario: decimation must be >= 1");
        if (schedule.empty()) throw input_error("Scenario: schedule must not be empty");
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            if (schedule[i].t_start_s < 0.0)
                throw input_error("Scenario: schedule times must be non-negative");
            if (i > 0 && schedule[i].t_start_s < schedule[i - 1].t_start_s)
                throw input_error("Scenario: schedule must be time-ordered");
        }
        for (double v : {v_sto_init_v, v_hv_init_v, v_reg_init_v, v_ldo_init_v})
            if (v < 0.0) throw input_error("Scenario: initial rail voltages must be >= 0");
    }
};

struct TraceRow {
    double clock_s = 0.0;
    PmuMode mode = PmuMode::STARTUP;
    bool hv_active = false;
    double v_rect_v = 0.0;
    double v_reg_v = 0.0;
    double v_sto_v = 0.0;
    double v_hv_v = 0.0;
    double duty_filtered = 0.0;
    double cr_sto = 0.0;  // ratio values as numbers
    double cr_reg = 0.0;
    int cr_hv = 4;
    double p_rect_w = 0.0;
    double p_in_reg_w = 0.0;
    double p_in_sto_w = 0.0;
    double p_reg_w = 0.0;  // delivered to the regulated load
    double p_sto_w = 0.0;  // delivered into storage
    double losses_w = 0.0;
    double eta_mppt = 0.0;
    double eta_overall = 0.0;
    // carried for metrics, not part of the CSV schema
    double v_s_amp_v = 0.0;
    double p_mpp_w = 0.0;
};

struct SimEvent {
    double t_s = 0.0;
    std::string what;
};

struct EnergyLedger {
    double e_in_j = 0.0;     // rectifier output energy
    double e_load_j = 0.0;   // delivered to the regulated load
    double e_loss_j = 0.0;   // all modeled losses
    double e_caps_start_j = 0.0;
    double e_caps_end_j = 0.0;

    double residual_j() const {
        return e_in_j + e_caps_start_j - e_caps_end_j - e_load_j - e_loss_j;
    }
    /// Residual relative to cumulative input (plus net storage discharge for
    /// input-free scenarios).
    double residual_rel() const {
        const double discharge = std::max(0.0, e_caps_start_j - e_caps_end_j);
        const double denom = std::max(e_in_j + discharge, 1e-15);
        return std::abs(residual_j()) / denom;
    }
};

struct SimTrace {
    std::vector<TraceRow> rows;
    std::vector<SimEvent> events;
    EnergyLedger energy;
    double dt_s = 0.0;
    double hv_e_in_j = 0.0;      // HV charger intake over all episodes
    double hv_e_stored_j = 0.0;  // exact energy gained by the HV capacitor

    bool has_event(const std::string& prefix) const {
        for (const auto& e : events)
            if (e.what.rfind(prefix, 0) == 0) return true;
        return false;
    }
};

inline SimTrace simulate(const Scenario& sc, const PmuConfig& cfg) {
    cfg.validate();
    sc.validate();

    const double pi = std::numbers::pi;
    const double omega = 2.0 * pi * sc.freq_hz;
    const double dt = sc.dt_s;
    const int n_steps = static_cast<int>(std::llround(sc.duration_s / dt));

    const auto sto_set = rsc_ratio_set(RscStageKind::STO, cfg.adder_enabled_sto);
    const auto reg_set = rsc_ratio_set(RscStageKind::REG, cfg.adder_enabled_reg);

    PmuState st;
    st.cr_sto_index = std::min(cfg.cr_sto_boot_index, static_cast<int>(sto_set.size()) - 1);
    st.cr_reg_index = std::min(cfg.cr_reg_boot_index, static_cast<int>(reg_set.size()) - 1);
    st.v_sto_v = sc.v_sto_init_v;
    st.v_hv_v = sc.v_hv_init_v;
    st.v_reg_v = sc.v_reg_init_v;
    st.v_ldo_v = sc.v_ldo_init_v;

    // MPP power scales exactly with the squared source amplitude
    BvdModel unit = sc.transducer;
    unit.v_s_amp_v = 1.0;
    const double p_mpp_unit = find_mpp(unit, omega, 1024).op.p_out_w;

    SimTrace tr;
    tr.dt_s = dt;
    EnergyLedger& led = tr.energy;
    auto cap_energy = [&]() {
        return 0.5 * (cfg.c_sto_f * st.v_sto_v * st.v_sto_v + cfg.c_hv_f * st.v_hv_v * st.v_hv_v +
                      cfg.c_reg_f * st.v_reg_v * st.v_reg_v +
                      cfg.c_ldo_f * st.v_ldo_v * st.v_ldo_v);
    };
    led.e_caps_start_j = cap_energy();

    auto event = [&](double t, const std::string& what) { tr.events.push_back({t, what}); };

    // controller bookkeeping
    double sto_timer = 0.0, reg_timer = 0.0, aux_timer = 0.0;
    double reg_duty_acc = 0.0, reg_duty_time = 0.0;
    // until a powered equilibrium has been seen, input power counts as absent
    double brownout_timer = cfg.brownout_debounce_s + 1.0;
    double recover_timer = 0.0;
    bool was_input_present = false;
    bool aux_to_sto = false;
    int droop_floor = -1;  // reg ratio index that failed regulation at droop_v_in
    double droop_v_in = 0.0;
    bool was_por = false, was_sto_full = false, was_brownout = false;
    double prev_powered_v_rect = 0.0;

    std::size_t cursor = 0;
    double v_s_now = 0.0, i_load_now = 0.0;

    const double filter_alpha = 1.0 - std::exp(-dt / cfg.duty_filter_tau_s);
    const auto aux_wait = std::max(cfg.t_wait_sto_s, cfg.t_wait_reg_s);
    const double tick_eps = 0.5 * dt;

    for (int k = 0; k < n_steps; ++k) {
        const double t = k * dt;
        st.clock_s = t;

        while (cursor < sc.schedule.size() && sc.schedule[cursor].t_start_s <= t + tick_eps) {
            const ScenarioStep& s = sc.schedule[cursor];
            if (s.v_s_amp_v) v_s_now = *s.v_s_amp_v;
            if (s.load_current_a) i_load_now = *s.load_current_a;
            if (s.hv_trigger && st.v_hv_v < cfg.v_hv_target_v) {
                st.hv_active = true;
                event(t, "hv_start");
            }
            ++cursor;
        }

        BvdModel model_now = sc.transducer;
        model_now.v_s_amp_v = v_s_now;
        const double p_mpp_now = p_mpp_unit * v_s_now * v_s_now;

        // ------- input-power presence, debounced on modeled rails -------
        bool input_present;
        if (st.mode == PmuMode::STORAGE_REUSE) {
            const double oc = (v_s_now > 0.0) ? open_circuit_amplitude(model_now, omega) : 0.0;
            if (oc > 2.0 * cfg.brownout_v)
                recover_timer += dt;
            else
                recover_timer = 0.0;
            input_present = recover_timer > cfg.brownout_debounce_s;
            if (input_present) brownout_timer = 0.0;
        } else {
            if (prev_powered_v_rect < cfg.brownout_v)
                brownout_timer += dt;
            else
                brownout_timer = 0.0;
            input_present = brownout_timer <= cfg.brownout_debounce_s;
            if (!input_present) recover_timer = 0.0;
        }
        if (was_input_present && !input_present) event(t, "brownout");
        was_input_present = input_present;

        const ModeDecision md = mode_controller_step(st, cfg, input_present);
        if (md.mode != st.mode) event(t, std::string("mode:") + to_string(md.mode));
        if (md.por && !was_por) event(t, "por");
        if (md.sto_full && !was_sto_full) event(t, "sto_paused");
        if (!md.sto_full && was_sto_full) event(t, "sto_resumed");
        was_por = md.por;
        was_sto_full = md.sto_full;
        st.mode = md.mode;
        st.por = md.por;
        st.sto_full = md.sto_full;

        // ------- stage laws for this step -------
        RscStage sto_stage{RscStageKind::STO, sto_set[static_cast<std::size_t>(st.cr_sto_index)],
                           RscStageKind::STO};
        RscStage reg_stage{RscStageKind::REG, reg_set[static_cast<std::size_t>(st.cr_reg_index)],
                           RscStageKind::REG};
        const TransferParams sto_p = stage_params(sto_stage, cfg, aux_to_sto ? 2.0 : 1.0);
        const TransferParams reg_p = stage_params(reg_stage, cfg, aux_to_sto ? 1.0 : 2.0);

        auto ldo_q = [&](double v_in) {
            if (st.v_ldo_v >= cfg.v_ldo_target_v || v_in <= st.v_ldo_v + 0.05) return 0.0;
            return std::min(cfg.i_ldo_charge_a * dt,
                            (std::min(cfg.v_ldo_target_v, v_in) - st.v_ldo_v) * cfg.c_ldo_f);
        };

        const double q_load = i_load_now * dt;
        // post-POR the LDO input rides the regulated rail and is one of its loads
        const double q_ldo_reg = st.por ? ldo_q(st.v_reg_v) : 0.0;
        const double q_reg_need = q_load + q_ldo_reg +
                                  std::max(0.0, cfg.v_reg_target_v - st.v_reg_v) * cfg.c_reg_f;

        auto reg_tx = [&](double v_in) {
            return charge_transfer(reg_p, v_in, st.v_reg_v, dt, q_reg_need);
        };
        auto sto_tx = [&](double v_in) {
            if (st.sto_full) return ChargeTransfer{};
            return charge_transfer(sto_p, v_in, st.v_sto_v, dt);
        };
        auto hv_tx = [&](double v_in) {
            PmuState probe = st;
            probe.v_rect_v = v_in;
            return hv_charge_step(probe, cfg, dt);
        };

        const bool hv_runs = st.hv_active && st.mode != PmuMode::STARTUP;

        double p_rect = 0.0, p_in_reg = 0.0, p_in_sto = 0.0;
        double p_reg_deliv = 0.0, p_sto_deliv = 0.0, losses_w = 0.0;
        double duty_inst = 0.0;

        ChargeTransfer reg_t, sto_t;
        HvStepResult hv_r;
        hv_r.v_hv_v = st.v_hv_v;
        hv_r.cr_hv = st.cr_hv;
        double q_ldo = 0.0;
        double v_supply = 0.0;

        if (st.mode == PmuMode::STORAGE_REUSE) {
            v_supply = st.v_sto_v;
            st.v_rect_v = v_supply;  // rail reconfigured onto the supercap
            duty_inst = 0.0;
        } else {
            // powered: solve the interface equilibrium against converter demand
            auto demand = [&](double v) {
                double q = st.por ? 0.0 : ldo_q(v);  // post-POR the LDO rides V_REG
                if (st.mode == PmuMode::NORMAL_MPPT) {
                    q += reg_tx(v).q_in_c + sto_tx(v).q_in_c;
                    if (hv_runs) q += hv_tx(v).q_in_c;
                }
                return q / dt;
            };
            const EquilibriumResult eq =
                rectifier_equilibrium(model_now, omega, demand, 1e-10);
            if (eq.brownout && !was_brownout) event(t, "brownout");
            was_brownout = eq.brownout;
            st.v_rect_v = eq.op.v_rect_v;
            duty_inst = eq.brownout ? 0.0 : eq.op.duty_rect;
            v_supply = st.v_rect_v;
            prev_powered_v_rect = st.v_rect_v;
        }

        // pre-POR the LDO trickle-charges straight from the rail (storage rail
        // when the input is dead, so a zero-input boot still wakes from the cap)
        const bool ldo_from_storage =
            !st.por && (st.mode == PmuMode::STORAGE_REUSE ||
                        (st.mode == PmuMode::STARTUP && st.v_sto_v > v_supply));
        const double v_ldo_src = ldo_from_storage ? st.v_sto_v : v_supply;
        if (!st.por) q_ldo = ldo_q(v_ldo_src);

        if (st.mode == PmuMode::NORMAL_MPPT || st.mode == PmuMode::STORAGE_REUSE) {
            reg_t = reg_tx(v_supply);
            if (st.mode == PmuMode::NORMAL_MPPT) sto_t = sto_tx(v_supply);
            if (hv_runs) hv_r = hv_tx(v_supply);
        }

        // ------- apply flows with midpoint-priced rail receipts -------
        // The converter laws quote charge against start-of-step rail voltages;
        // repricing their intake against the step-mean voltage keeps the step
        // exactly closed even across violent rail swings (cold recharge).
        double e_in_reg = 0.0, e_in_sto = 0.0;
        double q_ldo_served = 0.0, e_ldo_src = 0.0;
        // regulated rail
        {
            const double v0 = st.v_reg_v;
            double q_served = q_load;
            double q_served_ldo = q_ldo_reg;
            double v1 = v0 + (reg_t.q_out_c - q_load - q_ldo_reg) / cfg.c_reg_f;
            if (v1 < 0.0) {  // starved: the loads only get what is there
                const double avail = reg_t.q_out_c + v0 * cfg.c_reg_f;
                q_served = std::min(q_load, avail);
                q_served_ldo = std::min(q_ldo_reg, avail - q_served);
                v1 = 0.0;
            }
            const double vbar = 0.5 * (v0 + v1);
            st.v_reg_v = v1;
            p_reg_deliv = q_served * vbar / dt;
            led.e_load_j += q_served * vbar;
            e_in_reg = reg_t.q_out_c * vbar + reg_t.e_loss_j;
            if (st.por) {
                q_ldo_served = q_served_ldo;
                e_ldo_src = q_served_ldo * vbar;
            }
        }
        // storage rail: intake in normal mode, discharge in reuse
        double e_esr = 0.0;
        {
            double q_draw = 0.0;
            if (st.mode == PmuMode::STORAGE_REUSE)
                q_draw = e_in_reg / std::max(v_supply, 1e-12) +
                         (hv_runs ? hv_r.q_in_c : 0.0);
            if (ldo_from_storage) q_draw += q_ldo;
            const double q_in_flows = sto_t.q_out_c;
            const double i_sto = (q_in_flows + q_draw) / dt;
            e_esr = i_sto * i_sto * cfg.sto_esr_ohm * dt;
            if (st.mode == PmuMode::STORAGE_REUSE)  // ESR of a discharge is paid by the cap
                q_draw += e_esr / std::max(st.v_sto_v, 1e-12);
            const double v0 = st.v_sto_v;
            const double v1 = std::max(0.0, v0 + (q_in_flows - q_draw) / cfg.c_sto_f);
            const double vbar = 0.5 * (v0 + v1);
            st.v_sto_v = v1;
            if (st.mode == PmuMode::STORAGE_REUSE) st.v_rect_v = v1;  // rail rides the cap
            p_sto_deliv = q_in_flows * vbar / dt;
            e_in_sto = q_in_flows * vbar + sto_t.e_loss_j;
            losses_w += e_esr / dt;
        }
        // LDO rail (ideal-drop charge path)
        {
            if (!st.por) {
                q_ldo_served = q_ldo;
                e_ldo_src = q_ldo * v_ldo_src;
            }
            const double v0 = st.v_ldo_v;
            const double v1 = v0 + q_ldo_served / cfg.c_ldo_f;
            const double de = 0.5 * cfg.c_ldo_f * (v1 * v1 - v0 * v0);
            st.v_ldo_v = v1;
            losses_w += (e_ldo_src - de) / dt;
        }

        // HV capacitor
        if (hv_runs) {
            if (hv_r.cr_hv != st.cr_hv) {
                std::ostringstream os;
                os << "cr_hv:" << st.cr_hv << "->" << hv_r.cr_hv;
                event(t, os.str());
            }
            st.cr_hv = hv_r.cr_hv;
            st.v_hv_v = hv_r.v_hv_v;
            tr.hv_e_in_j += hv_r.e_in_j;
            tr.hv_e_stored_j += hv_r.e_stored_j;
            losses_w += hv_r.e_loss_j / dt;
            if (hv_r.done) {
                st.hv_active = false;
                event(t, "hv_done");
            }
        }

        losses_w += (reg_t.e_loss_j + sto_t.e_loss_j) / dt;

        // input-side energy: everything the rectifier supplies this step
        if (st.mode != PmuMode::STORAGE_REUSE) {
            const double e_ldo_rect = (st.por || ldo_from_storage) ? 0.0 : q_ldo * v_supply;
            const double e_in_step =
                e_in_reg + e_in_sto + e_esr + e_ldo_rect + (hv_runs ? hv_r.e_in_j : 0.0);
            led.e_in_j += e_in_step;
            p_rect = e_in_step / dt;
            p_in_reg = e_in_reg / dt;
            p_in_sto = (e_in_sto + e_esr) / dt;
        } else {
            // discharge energy comes out of the supercap ledger via cap energies
            p_in_reg = e_in_reg / dt;
            p_in_sto = 0.0;
        }

        led.e_loss_j += losses_w * dt;

        // ------- controllers -------
        st.duty_filtered += (duty_inst - st.duty_filtered) * filter_alpha;

        {  // REG_EN duty monitor
            double duty_step = 0.0;
            const ChargeTransfer full = charge_transfer(reg_p, v_supply, st.v_reg_v, dt);
            if (full.q_out_c > 0.0)
                duty_step = std::min(1.0, reg_t.q_out_c / full.q_out_c);
            else if (q_reg_need > 0.0)
                duty_step = 1.0;  // enabled but unable to transfer
            reg_duty_acc += duty_step * dt;
            reg_duty_time += dt;
        }

        sto_timer += dt;
        // MPPT runs while the storage stage is charging; a paused stage draws
        // nothing, so tuning its ratio would only saturate the index
        if (st.mode == PmuMode::NORMAL_MPPT && !st.sto_full &&
            sto_timer + tick_eps >= cfg.t_wait_sto_s) {
            sto_timer = 0.0;
            const int ni = mppt_fsm_step(st, cfg);
            if (ni != st.cr_sto_index) {
                std::ostringstream os;
                os << "cr_sto:" << sto_set[static_cast<std::size_t>(st.cr_sto_index)].value()
                   << "->" << sto_set[static_cast<std::size_t>(ni)].value();
                event(t, os.str());
                st.cr_sto_index = ni;
            }
        }

        reg_timer += dt;
        if (st.mode != PmuMode::STARTUP && reg_timer + tick_eps >= cfg.t_wait_reg_s) {
            reg_timer = 0.0;
            st.reg_en_duty = reg_duty_time > 0.0 ? reg_duty_acc / reg_duty_time : 0.0;
            reg_duty_acc = reg_duty_time = 0.0;
            st.flag_eta_low = st.reg_en_duty < cfg.eta_th();
            st.drop_vreg = st.v_reg_v < cfg.v_drop_ref_v;
            if (st.drop_vreg) {
                droop_floor = st.cr_reg_index;
                droop_v_in = v_supply;
            } else if (droop_floor >= 0 && std::abs(v_supply - droop_v_in) > 0.1 * droop_v_in) {
                droop_floor = -1;  // conditions changed enough to re-probe
            }
            int ni = reg_optimizer_step(st, cfg);
            if (ni < st.cr_reg_index && droop_floor >= 0 && ni <= droop_floor) ni = st.cr_reg_index;
            if (ni != st.cr_reg_index) {
                std::ostringstream os;
                os << "cr_reg:" << reg_set[static_cast<std::size_t>(st.cr_reg_index)].value()
                   << "->" << reg_set[static_cast<std::size_t>(ni)].value();
                event(t, os.str());
                st.cr_reg_index = ni;
            }
        }

        aux_timer += dt;
        if (aux_timer + tick_eps >= aux_wait) {
            aux_timer = 0.0;
            // hand the AUX bank to STO when REG runs efficiently, but never
            // when losing half its capacitance would push REG_EN toward
            // saturation and starve the rail
            bool want = aux_to_sto;
            if (!aux_to_sto && st.mode == PmuMode::NORMAL_MPPT &&
                st.reg_en_duty >= cfg.eta_th() && st.reg_en_duty <= 0.45 && !st.sto_full)
                want = true;
            if (aux_to_sto && (st.reg_en_duty < cfg.eta_th() || st.reg_en_duty > 0.9 ||
                               st.sto_full || st.mode != PmuMode::NORMAL_MPPT))
                want = false;
            if (want != aux_to_sto) {
                aux_to_sto = want;
                event(t, aux_to_sto ? "aux:sto" : "aux:reg");
            }
        }

        // ------- trace -------
        if (k % sc.decimation == 0) {
            TraceRow row;
            row.clock_s = t;
            row.mode = st.mode;
            row.hv_active = st.hv_active;
            row.v_rect_v = st.v_rect_v;
            row.v_reg_v = st.v_reg_v;
            row.v_sto_v = st.v_sto_v;
            row.v_hv_v = st.v_hv_v;
            row.duty_filtered = st.duty_filtered;
            row.cr_sto = sto_set[static_cast<std::size_t>(st.cr_sto_index)].value();
            row.cr_reg = reg_set[static_cast<std::size_t>(st.cr_reg_index)].value();
            row.cr_hv = st.cr_hv;
            row.p_rect_w = p_rect;
            row.p_in_reg_w = p_in_reg;
            row.p_in_sto_w = p_in_sto;
            row.p_reg_w = p_reg_deliv;
            row.p_sto_w = p_sto_deliv;
            row.losses_w = losses_w;
            row.v_s_amp_v = v_s_now;
            row.p_mpp_w = p_mpp_now;
            row.eta_mppt = p_mpp_now > 0.0 ? std::min(1.0, p_rect / p_mpp_now) : 0.0;
            row.eta_overall =
                p_mpp_now > 0.0 ? std::min(1.0, (p_reg_deliv + p_sto_deliv) / p_mpp_now) : 0.0;
            tr.rows.push_back(row);
        }
    }

    led.e_caps_end_j = cap_energy();
    if (led.residual_rel() > 1e-3) {
        std::ostringstream os;
        os << "simulate: energy balance residual " << led.residual_j() << " J ("
           << led.residual_rel() * 100.0 << "% of input) exceeds 0.1%";
        throw energy_balance_error(os.str());
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Efficiency metrics over steady-state windows
// ---------------------------------------------------------------------------

struct SteadySegment {
    double t_start_s = 0.0;
    double t_end_s = 0.0;
    double v_s_amp_v = 0.0;
    double p_mpp_w = 0.0;
    double eta_mppt = 0.0;
    double eta_overall = 0.0;
    double duty_mean = 0.0;
};

struct MetricsReport {
    std::vector<SteadySegment> segments;
    double eta_mppt = 0.0;     // of the final steady segment
    double eta_overall = 0.0;  // of the final steady segment
    std::optional<double> hv_charge_eta;
    double hv_e_in_j = 0.0;
    double hv_e_stored_j = 0.0;
};

/// Windowed averages over the trailing 30% of every maximal constant-input
/// NORMAL_MPPT stretch. p_mpp is recomputed from the model, so the metrics
/// are independent of the per-row values.
inline MetricsReport efficiency_metrics(const SimTrace& trace, const BvdModel& model,
                                        double omega) {
    if (trace.rows.empty()) throw metric_error("efficiency_metrics: empty trace");
    BvdModel unit = model;
    unit.v_s_amp_v = 1.0;
    const double p_unit = find_mpp(unit, omega, 1024).op.p_out_w;

    MetricsReport rep;
    rep.hv_e_in_j = trace.hv_e_in_j;
    rep.hv_e_stored_j = trace.hv_e_stored_j;
    if (trace.hv_e_in_j > 0.0) rep.hv_charge_eta = trace.hv_e_stored_j / trace.hv_e_in_j;

    const auto& rows = trace.rows;
    std::size_t i = 0;
    while (i < rows.size()) {
        if (rows[i].mode != PmuMode::NORMAL_MPPT || rows[i].v_s_amp_v <= 0.0) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < rows.size() && rows[j + 1].mode == PmuMode::NORMAL_MPPT &&
               rows[j + 1].v_s_amp_v == rows[i].v_s_amp_v)
            ++j;
        const std::size_t count = j - i + 1;
        if (count >= 10) {
            const std::size_t w0 = j - std::max<std::size_t>(1, count * 3 / 10) + 1;
            SteadySegment seg;
            seg.t_start_s = rows[i].clock_s;
            seg.t_end_s = rows[j].clock_s;
            seg.v_s_amp_v = rows[i].v_s_amp_v;
            seg.p_mpp_w = p_unit * seg.v_s_amp_v * seg.v_s_amp_v;
            double p_rect = 0.0, p_out = 0.0, duty = 0.0;
            for (std::size_t r = w0; r <= j; ++r) {
                p_rect += rows[r].p_rect_w;
                p_out += rows[r].p_reg_w + rows[r].p_sto_w;
                duty += rows[r].duty_filtered;
            }
            const double n = static_cast<double>(j - w0 + 1);
            seg.eta_mppt = std::clamp(p_rect / n / seg.p_mpp_w, 0.0, 1.0);
            seg.eta_overall = std::clamp(p_out / n / seg.p_mpp_w, 0.0, 1.0);
            seg.duty_mean = duty / n;
            rep.segments.push_back(seg);
        }
        i = j + 1;
    }
    if (rep.segments.empty() && !rep.hv_charge_eta)
        throw metric_error("efficiency_metrics: no steady-state window in trace");
    if (!rep.segments.empty()) {
        rep.eta_mppt = rep.segments.back().eta_mppt;
        rep.eta_overall = rep.segments.back().eta_overall;
    }
    return rep;
}

}  // namespace mewpt
