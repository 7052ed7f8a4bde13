#pragma once

// Scenario file schema (JSON) and the bundled fixtures. A scenario names a
// transducer (inline, by file path, or a built-in), the carrier frequency,
// PMU configuration overrides, and a piecewise-constant schedule of source
// amplitude, load current, and HV task triggers.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mewpt/bvd.hpp"
#include "mewpt/errors.hpp"
#include "mewpt/io.hpp"
#include "mewpt/pmu_config.hpp"
#include "mewpt/sim.hpp"

namespace mewpt {

/// Apply PmuConfig overrides from a JSON object; unknown keys are schema errors.
inline void apply_pmu_overrides(PmuConfig& cfg, const nlohmann::json& j,
                                const std::string& path_prefix = "pmu") {
    for (const auto& [key, val] : j.items()) {
        auto num = [&]() -> double {
            if (!val.is_number())
                throw input_error(path_prefix + "." + key + ": expected a number");
            return val.get<double>();
        };
        auto boolean = [&]() -> bool {
            if (!val.is_boolean())
                throw input_error(path_prefix + "." + key + ": expected a boolean");
            return val.get<bool>();
        };
        if (key == "c_fly_f") cfg.c_fly_f = num();
        else if (key == "n_fly_per_stage") cfg.n_fly_per_stage = static_cast<int>(num());
        else if (key == "c_fly_hv_f") cfg.c_fly_hv_f = num();
        else if (key == "f_sw_hz") cfg.f_sw_hz = num();
        else if (key == "adder_enabled_reg") cfg.adder_enabled_reg = boolean();
        else if (key == "adder_enabled_sto") cfg.adder_enabled_sto = boolean();
        else if (key == "bottom_plate_fraction") cfg.bottom_plate_fraction = num();
        else if (key == "switch_resistance_ohm") cfg.switch_resistance_ohm = num();
        else if (key == "controller_overhead_w") cfg.controller_overhead_w = num();
        else if (key == "duty_window") {
            if (!val.is_array() || val.size() != 2)
                throw input_error(path_prefix + ".duty_window: expected [low, high]");
            cfg.duty_window_low = val[0].get<double>();
            cfg.duty_window_high = val[1].get<double>();
        }
        else if (key == "duty_window_low") cfg.duty_window_low = num();
        else if (key == "duty_window_high") cfg.duty_window_high = num();
        else if (key == "t_wait_sto_s") cfg.t_wait_sto_s = num();
        else if (key == "duty_filter_tau_s") cfg.duty_filter_tau_s = num();
        else if (key == "t_wait_reg_s") cfg.t_wait_reg_s = num();
        else if (key == "eta_th_code") cfg.eta_th_code = static_cast<int>(num());
        else if (key == "v_reg_target_v") cfg.v_reg_target_v = num();
        else if (key == "v_reg_hyst_v") cfg.v_reg_hyst_v = num();
        else if (key == "v_drop_ref_v") cfg.v_drop_ref_v = num();
        else if (key == "c_reg_f") cfg.c_reg_f = num();
        else if (key == "c_sto_f") cfg.c_sto_f = num();
        else if (key == "sto_esr_ohm") cfg.sto_esr_ohm = num();
        else if (key == "v_sto_full_v") cfg.v_sto_full_v = num();
        else if (key == "c_hv_f") cfg.c_hv_f = num();
        else if (key == "v_hv_target_v") cfg.v_hv_target_v = num();
        else if (key == "hv_threshold_lo_v") cfg.hv_threshold_lo_v = num();
        else if (key == "hv_threshold_hi_v") cfg.hv_threshold_hi_v = num();
        else if (key == "por_threshold_v") cfg.por_threshold_v = num();
        else if (key == "v_ldo_target_v") cfg.v_ldo_target_v = num();
        else if (key == "c_ldo_f") cfg.c_ldo_f = num();
        else if (key == "i_ldo_charge_a") cfg.i_ldo_charge_a = num();
        else if (key == "brownout_v") cfg.brownout_v = num();
        else if (key == "brownout_debounce_s") cfg.brownout_debounce_s = num();
        else if (key == "cr_sto_boot_index") cfg.cr_sto_boot_index = static_cast<int>(num());
        else if (key == "cr_reg_boot_index") cfg.cr_reg_boot_index = static_cast<int>(num());
        else throw input_error(path_prefix + "." + key + ": unknown configuration key");
    }
}

struct ParsedScenario {
    Scenario scenario;
    PmuConfig pmu;
};

/// Parse a scenario document. base_dir resolves relative transducer paths.
inline ParsedScenario parse_scenario(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = ".") {
    using nlohmann::json;
    ParsedScenario out;
    Scenario& sc = out.scenario;
    try {
        sc.name = j.value("name", "scenario");
        if (!j.contains("transducer")) throw input_error("scenario.transducer: missing");
        const json& tj = j.at("transducer");
        if (tj.is_string()) {
            const std::string which = tj.get<std::string>();
            if (which == "default_tri_layer") sc.transducer = default_tri_layer();
            else if (which == "default_bi_layer") sc.transducer = default_bi_layer();
            else throw input_error("scenario.transducer: unknown built-in '" + which + "'");
        } else if (tj.is_object() && tj.contains("path")) {
            sc.transducer = io::load_model(base_dir / tj.at("path").get<std::string>());
        } else if (tj.is_object()) {
            sc.transducer = io::model_from_json(tj);
        } else {
            throw input_error("scenario.transducer: expected object, path or built-in name");
        }
        sc.freq_hz = j.value("freq_hz", 350e3);
        sc.duration_s = j.at("duration_s").get<double>();
        sc.dt_s = j.value("dt_s", 10e-6);
        sc.decimation = j.value("decimation", 1);
        if (j.contains("initial")) {
            const json& ij = j.at("initial");
            sc.v_sto_init_v = ij.value("v_sto_v", 0.0);
            sc.v_hv_init_v = ij.value("v_hv_v", 0.0);
            sc.v_reg_init_v = ij.value("v_reg_v", 0.0);
            sc.v_ldo_init_v = ij.value("v_ldo_v", 0.0);
        }
        if (j.contains("pmu")) apply_pmu_overrides(out.pmu, j.at("pmu"));
        if (!j.contains("schedule") || !j.at("schedule").is_array())
            throw input_error("scenario.schedule: missing or not an array");
        for (std::size_t i = 0; i < j.at("schedule").size(); ++i) {
            const json& ej = j.at("schedule")[i];
            const std::string at = "scenario.schedule[" + std::to_string(i) + "]";
            ScenarioStep step;
            if (!ej.contains("t_start_s")) throw input_error(at + ".t_start_s: missing");
            step.t_start_s = ej.at("t_start_s").get<double>();
            if (ej.value("power_off", false)) step.v_s_amp_v = 0.0;
            if (ej.contains("v_s_amp_v")) step.v_s_amp_v = ej.at("v_s_amp_v").get<double>();
            if (ej.contains("load_current_a"))
                step.load_current_a = ej.at("load_current_a").get<double>();
            step.hv_trigger = ej.value("hv_trigger", false);
            sc.schedule.push_back(step);
        }
    } catch (const json::exception& e) {
        throw input_error(std::string("scenario JSON: ") + e.what());
    }
    out.pmu.validate();
    sc.validate();
    return out;
}

inline ParsedScenario parse_scenario_text(const std::string& text,
                                          const std::filesystem::path& base_dir = ".") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("scenario JSON: ") + e.what());
    }
    return parse_scenario(j, base_dir);
}

// ---------------------------------------------------------------------------
// Bundled scenarios. These encode the demonstration narratives at desk scale:
// startup-and-fill, MPPT retuning after an input power step, adaptive HV
// charging during storage reuse, a power dropout with recovery, a cold start
// exercising the regulation optimizer, and an input-free drain.
// ---------------------------------------------------------------------------

inline const char* bundled_scenario_json(const std::string& name) {
    if (name == "figure9_like") {
        return R"json({
  "name": "figure9_like",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.30,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 0.6},
  "pmu": {"c_sto_f": 220e-6, "v_sto_full_v": 1.2},
  "schedule": [
    {"t_start_s": 0.0, "v_s_amp_v": 16.95, "load_current_a": 100e-6}
  ]
})json";
    }
    if (name == "figure16_like") {
        return R"json({
  "name": "figure16_like",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.15,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 0.20},
  "pmu": {"c_sto_f": 10e-3},
  "schedule": [
    {"t_start_s": 0.0, "v_s_amp_v": 16.95, "load_current_a": 520e-6},
    {"t_start_s": 0.075, "v_s_amp_v": 13.12941}
  ]
})json";
    }
    if (name == "hv12v") {
        return R"json({
  "name": "hv12v",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.04,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 1.45},
  "pmu": {"v_hv_target_v": 12.0},
  "schedule": [
    {"t_start_s": 0.0, "v_s_amp_v": 16.95, "load_current_a": 100e-6},
    {"t_start_s": 0.010, "power_off": true},
    {"t_start_s": 0.015, "hv_trigger": true}
  ]
})json";
    }
    if (name == "storage_reuse") {
        return R"json({
  "name": "storage_reuse",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.09,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 1.3},
  "schedule": [
    {"t_start_s": 0.0, "v_s_amp_v": 16.95, "load_current_a": 200e-6},
    {"t_start_s": 0.030, "power_off": true},
    {"t_start_s": 0.060, "v_s_amp_v": 16.95}
  ]
})json";
    }
    if (name == "coldstart") {
        return R"json({
  "name": "coldstart",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.06,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 0.5},
  "pmu": {"eta_th_code": 1, "c_sto_f": 10e-3, "t_wait_reg_s": 4e-3},
  "schedule": [
    {"t_start_s": 0.0, "v_s_amp_v": 16.95, "load_current_a": 550e-6}
  ]
})json";
    }
    if (name == "zero_input") {
        return R"json({
  "name": "zero_input",
  "transducer": "default_tri_layer",
  "freq_hz": 350e3,
  "duration_s": 0.05,
  "dt_s": 1e-5,
  "initial": {"v_sto_v": 1.4, "v_reg_v": 1.2, "v_ldo_v": 1.0},
  "schedule": [
    {"t_start_s": 0.0, "power_off": true, "load_current_a": 200e-6}
  ]
})json";
    }
    return nullptr;
}

inline std::vector<std::string> bundled_scenario_names() {
    return {"figure9_like", "figure16_like", "hv12v", "storage_reuse", "coldstart", "zero_input"};
}

/// Load a scenario by bundled name or file path.
inline ParsedScenario load_scenario(const std::string& name_or_path) {
    if (const char* text = bundled_scenario_json(name_or_path)) return parse_scenario_text(text);
    const std::filesystem::path p(name_or_path);
    return parse_scenario_text(io::read_file(p), p.has_parent_path() ? p.parent_path() : ".");
}

}  // namespace mewpt
