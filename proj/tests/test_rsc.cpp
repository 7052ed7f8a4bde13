#include "doctest.h"

#include <cmath>
#include <set>

#include "mewpt/rsc.hpp"
#include "test_util.hpp"

using namespace mewpt;

TEST_CASE("ratio set construction: 12 distinct ascending values") {
    const auto set = rsc_ratio_set(RscStageKind::STO);
    REQUIRE(set.size() == 12);
    std::set<double> distinct;
    for (std::size_t i = 0; i < set.size(); ++i) {
        distinct.insert(set[i].value());
        if (i > 0) CHECK(set[i].value() > set[i - 1].value());
    }
    CHECK(distinct.size() == 12);
    CHECK(set.front().value() == doctest::Approx(0.25));
    CHECK(set.back().value() == doctest::Approx(2.0));

    // the adder extends 2/3 to 5/3
    bool has_23 = false, has_53 = false;
    for (const auto& r : set) {
        if (r == Ratio{2, 3}) has_23 = true;
        if (r == Ratio{5, 3}) has_53 = true;
    }
    CHECK(has_23);
    CHECK(has_53);

    CHECK(rsc_ratio_set(RscStageKind::REG, false).size() == 6);
    const auto pre = rsc_ratio_set(RscStageKind::HV_PRE);
    REQUIRE(pre.size() == 3);
    CHECK(pre[0].value() == 1.0);
    CHECK(pre[2].value() == 3.0);
    CHECK(rsc_ratio_set(RscStageKind::HV_4X).size() == 1);
    CHECK(rsc_ratio_set(RscStageKind::HV_4X)[0].value() == 4.0);
    CHECK_THROWS_AS(rsc_ratio_set(RscStageKind::AUX), std::domain_error);
}

TEST_CASE("charge transfer: zero-headroom case costs only the controller overhead") {
    PmuConfig cfg;
    RscStage stage{RscStageKind::STO, {1, 2}, RscStageKind::STO};
    const double v_in = 1.6, v_out = 0.8;  // r*v_in == v_out
    const double dt = 1e-3;
    const auto t = rsc_transfer(stage, v_in, v_out, dt, cfg);
    CHECK(t.q_out_c == 0.0);
    CHECK(t.e_loss_j == doctest::Approx(cfg.controller_overhead_w * dt).epsilon(1e-12));
    CHECK(t.q_in_c * v_in == doctest::Approx(t.e_loss_j).epsilon(1e-12));
}

TEST_CASE("charge transfer: worst-case share into a discharged rail for one cycle") {
    PmuConfig cfg;
    cfg.bottom_plate_fraction = 0.0;
    cfg.switch_resistance_ohm = 0.0;
    cfg.controller_overhead_w = 0.0;
    RscStage stage{RscStageKind::STO, {1, 1}, RscStageKind::STO};
    const double dt = 1.0 / cfg.f_sw_hz;  // exactly one switching cycle
    const double v_in = 1.2;
    const auto t = rsc_transfer(stage, v_in, 0.0, dt, cfg);
    const double c_eff = cfg.n_fly_per_stage * cfg.c_fly_f;
    CHECK(t.q_out_c == doctest::Approx(c_eff * v_in).epsilon(1e-12));
    CHECK(t.e_loss_j == doctest::Approx(0.5 * c_eff * v_in * v_in).epsilon(1e-12));
}

TEST_CASE("charge transfer: conservation identity holds exactly") {
    PmuConfig cfg;
    testutil::Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        RscStage stage{RscStageKind::REG,
                       rsc_ratio_set(RscStageKind::REG)[static_cast<std::size_t>(
                           rng.next() % 12)],
                       RscStageKind::REG};
        const double v_in = rng.uniform(0.2, 2.0);
        const double v_out = rng.uniform(0.0, 2.0);
        const double dt = rng.log_uniform(1e-6, 1e-2);
        const auto t = rsc_transfer(stage, v_in, v_out, dt, cfg);
        const double lhs = t.q_in_c * v_in;
        const double rhs = t.q_out_c * v_out + t.e_loss_j;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        CHECK(t.q_out_c >= 0.0);
    }
}

TEST_CASE("stage efficiency over output voltage is unimodal with an interior peak") {
    PmuConfig cfg;
    RscStage stage{RscStageKind::REG, {1, 1}, RscStageKind::REG};
    const double v_in = 1.2, dt = 1e-4;
    int maxima = 0;
    double prev2 = -1.0, prev1 = -1.0, peak_v = 0.0, peak_eta = -1.0;
    for (int i = 1; i <= 118; ++i) {
        const double v_out = 0.01 * i;  // up to 1.18 V < r*v_in
        const auto t = rsc_transfer(stage, v_in, v_out, dt, cfg);
        const double eta = t.q_out_c * v_out / (t.q_in_c * v_in);
        if (eta > peak_eta) {
            peak_eta = eta;
            peak_v = v_out;
        }
        if (prev2 >= 0.0 && prev1 > prev2 && prev1 > eta) ++maxima;
        prev2 = prev1;
        prev1 = eta;
    }
    CHECK(maxima == 1);
    CHECK(peak_v < v_in);
    CHECK(peak_eta > 0.5);

    // spot checks against the per-cycle hand computation
    for (double v_out : {0.4, 0.8, 1.1}) {
        const auto t = rsc_transfer(stage, v_in, v_out, dt, cfg);
        const double c_eff = cfg.n_fly_per_stage * cfg.c_fly_f;
        const double dv = v_in - v_out;
        const double cycles = cfg.f_sw_hz * dt;
        const double q_cycle = c_eff * dv;
        const double e_expected = 0.5 * c_eff * dv * dv * cycles +
                                  cfg.bottom_plate_fraction * c_eff * v_in * v_in * cycles +
                                  q_cycle * q_cycle * cfg.f_sw_hz *
                                      cfg.switch_resistance_ohm * cycles +
                                  cfg.controller_overhead_w * dt;
        CHECK(t.q_out_c == doctest::Approx(q_cycle * cycles).epsilon(1e-12));
        CHECK(t.e_loss_j == doctest::Approx(e_expected).epsilon(1e-12));
    }
}

TEST_CASE("AUX assignment doubles the effective stage capacitance") {
    PmuConfig cfg;
    RscStage stage{RscStageKind::STO, {1, 1}, RscStageKind::STO};
    const auto base = stage_params(stage, cfg, 1.0);
    const auto boosted = stage_params(stage, cfg, 2.0);
    CHECK(boosted.c_eff_f == doctest::Approx(2.0 * base.c_eff_f));
}

TEST_CASE("HV stage parameters compose the pre-charge and 4x stages") {
    PmuConfig cfg;
    for (int pre = 1; pre <= 3; ++pre) {
        RscStage stage{RscStageKind::HV_PRE, {pre, 1}, RscStageKind::STO};
        const auto p = stage_params(stage, cfg);
        CHECK(p.ratio == doctest::Approx(4.0 * pre));
        CHECK(p.c_eff_f == doctest::Approx(cfg.c_fly_hv_f / (4.0 * pre)));
    }
}
