#include "doctest.h"

#include <cmath>
#include <complex>

#include "mewpt/rectifier.hpp"
#include "test_util.hpp"

using namespace mewpt;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;
const double kW350 = kTwoPi * 350e3;
}

TEST_CASE("waveform: boundary values and the frozen branch-1 evaluation") {
    const double theta = 2.0, i0 = 1e-3, cp = 2e-9;
    // mpmath: V_RECT and branch 1 at phase 1.0
    CHECK(v_rect_of_theta(theta, i0, kW350, cp) ==
          doctest::Approx(0.16099054941459147).epsilon(1e-12));
    CHECK(vac_waveform(theta, i0, kW350, cp, 1.0) ==
          doctest::Approx(-0.056471748915974706).epsilon(1e-12));

    const double vr = v_rect_of_theta(theta, i0, kW350, cp);
    CHECK(vac_waveform(theta, i0, kW350, cp, 0.0) == doctest::Approx(-vr).epsilon(1e-12));
    // both sides of phase = theta evaluate to +V_RECT
    CHECK(vac_waveform(theta, i0, kW350, cp, theta) == doctest::Approx(vr).epsilon(1e-12));
    CHECK(vac_waveform(theta, i0, kW350, cp, theta - 1e-9) == doctest::Approx(vr).epsilon(1e-6));

    CHECK_THROWS_AS(vac_waveform(-0.1, i0, kW350, cp, 0.0), std::domain_error);
    CHECK_THROWS_AS(vac_waveform(kPi + 0.1, i0, kW350, cp, 0.0), std::domain_error);
}

TEST_CASE("waveform: continuity at all branch boundaries and half-wave antisymmetry") {
    testutil::Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = rng.uniform(0.05, kPi - 0.05);
        const double i0 = rng.log_uniform(1e-5, 1e-2);
        const double cp = rng.log_uniform(2e-10, 1e-8);
        const double scale = i0 / (kW350 * cp);
        for (double b : {theta, kPi, theta + kPi}) {
            const double lo = vac_waveform(theta, i0, kW350, cp, b - 1e-10);
            const double hi = vac_waveform(theta, i0, kW350, cp, b + 1e-10);
            CHECK(std::abs(hi - lo) < 1e-6 * scale + 1e-15);
        }
        for (int k = 0; k < 8; ++k) {
            const double ph = rng.uniform(0.0, kTwoPi);
            const double a = vac_waveform(theta, i0, kW350, cp, ph);
            const double b = vac_waveform(theta, i0, kW350, cp, ph + kPi);
            CHECK(std::abs(a + b) < 1e-12 * scale + 1e-18);
        }
    }
}

TEST_CASE("v_rect endpoints and monotonicity") {
    const double i0 = 1e-3, cp = 2e-9;
    CHECK(v_rect_of_theta(0.0, i0, kW350, cp) == 0.0);
    CHECK(v_rect_of_theta(kPi, i0, kW350, cp) ==
          doctest::Approx(i0 / (kW350 * cp)).epsilon(1e-12));
    CHECK(v_rect_of_theta(kPi / 2, i0, kW350, cp) ==
          doctest::Approx(i0 / (2.0 * kW350 * cp)).epsilon(1e-12));
    testutil::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        double a = rng.uniform(0.0, kPi), b = rng.uniform(0.0, kPi);
        if (a > b) std::swap(a, b);
        CHECK(v_rect_of_theta(a, i0, kW350, cp) <= v_rect_of_theta(b, i0, kW350, cp) + 1e-15);
    }
}

TEST_CASE("fundamental component: endpoints, frozen values, sign structure") {
    const double i0 = 1e-3, cp = 2e-9;
    auto f0 = fundamental_component(0.0, i0, kW350, cp);
    CHECK(f0.cos_coeff_v == doctest::Approx(0.0));
    CHECK(f0.sin_coeff_v == doctest::Approx(0.0));

    auto fpi = fundamental_component(kPi, i0, kW350, cp);
    CHECK(fpi.cos_coeff_v == doctest::Approx(-i0 / (kW350 * cp)).epsilon(1e-12));
    CHECK(fpi.sin_coeff_v == doctest::Approx(0.0).epsilon(1e-12));

    auto fh = fundamental_component(kPi / 2, i0, kW350, cp);
    CHECK(fh.cos_coeff_v == doctest::Approx(-0.11368210220849667).epsilon(1e-12));
    CHECK(fh.sin_coeff_v == doctest::Approx(0.072372274030241265).epsilon(1e-12));

    testutil::Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto f = fundamental_component(rng.uniform(0.0, kPi), i0, kW350, cp);
        CHECK(f.cos_coeff_v <= 1e-15);
        CHECK(f.sin_coeff_v >= -1e-15);
    }
}

TEST_CASE("equivalent impedance at the distinguished angles") {
    const double cp = 2e-9;
    const auto z_pi = equivalent_impedance(kPi, kW350, cp);
    CHECK(z_pi.real() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(z_pi.imag() == doctest::Approx(-1.0 / (kW350 * cp)).epsilon(1e-12));

    const auto z_0 = equivalent_impedance(0.0, kW350, cp);
    CHECK(z_0 == std::complex<double>(0.0, 0.0));

    const auto z_h = equivalent_impedance(kPi / 2, kW350, cp);
    const double s = 1.0 / (kPi * kW350 * cp);
    CHECK(z_h.real() == doctest::Approx(s).epsilon(1e-12));
    CHECK(z_h.imag() == doctest::Approx(-s * kPi / 2).epsilon(1e-12));
}

TEST_CASE("operating point: endpoints, impedance sign structure, Eq. consistency") {
    const BvdModel m = default_tri_layer();
    CHECK(operating_point(m, kW350, 0.0).p_out_w == 0.0);
    CHECK(operating_point(m, kW350, kPi).p_out_w == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(std::isinf(operating_point(m, kW350, kPi).r_l_ohm));

    testutil::Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const double theta = rng.uniform(1e-3, kPi - 1e-3);
        const auto op = operating_point(m, kW350, theta);
        CHECK(op.duty_rect == doctest::Approx(1.0 - theta / kPi).epsilon(1e-15));
        CHECK(op.z_e_ohm.real() >= 0.0);
        CHECK(op.z_e_ohm.imag() <= 0.0);
        CHECK(op.p_out_w >= 0.0);
        // the two P_out forms of the power expression agree
        const double alt = op.v_rect_v * op.v_rect_v / op.r_l_ohm;
        CHECK(std::abs(alt - op.p_out_w) <= 1e-9 * op.p_out_w);
    }
}

TEST_CASE("theta/load bijection") {
    const double cp = 2e-9;
    const double k = kPi / (2.0 * kW350 * cp);
    CHECK(theta_from_load(k, kW350, cp) == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(theta_from_load(0.0, kW350, cp) == doctest::Approx(0.0));
    CHECK(theta_from_load(3.0 * k, kW350, cp) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(theta_from_load(-1.0, kW350, cp), std::domain_error);

    testutil::Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const double theta = rng.uniform(1e-3, kPi - 1e-2);
        const double r = load_of_theta(theta, kW350, cp);
        CHECK(theta_from_load(r, kW350, cp) == doctest::Approx(theta).epsilon(1e-12));
    }
}

TEST_CASE("find_mpp: argmax property on the grid") {
    testutil::Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const BvdModel m = testutil::random_model(rng);
        const double w = kTwoPi * resonance_frequencies(m).f_short_hz * 1.002;
        const auto res = find_mpp(m, w, 4096);
        for (int i = 0; i < 4096; ++i) {
            const double theta = kPi * i / 4095.0;
            CHECK(operating_point(m, w, theta).p_out_w <= res.op.p_out_w * (1.0 + 1e-12));
        }
    }
    CHECK_THROWS_AS(find_mpp(default_tri_layer(), kW350, 32), std::invalid_argument);
}

TEST_CASE("find_mpp: duty is invariant under source scaling and skewed from 50%") {
    const BvdModel base = default_tri_layer();
    const auto ref = find_mpp(base, kW350, 2048);
    for (double scale : {0.5, 2.0, 4.0}) {
        BvdModel m = base;
        m.v_s_amp_v *= scale;
        const auto r = find_mpp(m, kW350, 2048);
        CHECK(r.grid_index == ref.grid_index);
        CHECK(r.op.duty_rect == doctest::Approx(ref.op.duty_rect).epsilon(1e-9));
    }
    CHECK(std::abs(ref.op.duty_rect - 0.5) > 0.004);  // skewed away from the midpoint
}

TEST_CASE("find_mpp: uncoupled limit approaches a 50% duty monotonically") {
    // inflate c_p * r_m to force the coupling down at a fixed resonance
    auto with_coupling = [](double k) {
        BvdModel m = default_tri_layer();
        m.r_m_ohm *= 2.5 / k;  // coupling scales as 1/(c_p r_m)
        return m;
    };
    double prev_dist = 1.0;
    for (double k : {1.0, 0.1, 0.01}) {
        const BvdModel m = with_coupling(k);
        CHECK(coupling_factor(m).coupling == doctest::Approx(k).epsilon(1e-12));
        const auto r = find_mpp(m, kW350, 2048);
        const double dist = std::abs(r.op.duty_rect - 0.5);
        CHECK(dist < prev_dist + 1e-12);
        prev_dist = dist;
        if (k <= 0.01) CHECK(dist < 0.01);
    }
}

TEST_CASE("frequency sweep: consistency, argmax separation, open-circuit limits") {
    const BvdModel m = default_tri_layer();

    // single frequency row is consistent with find_mpp
    const auto one = frequency_sweep(m, {350e3});
    const auto mpp = find_mpp(m, kW350, 1024);
    CHECK(one.size() == 1);
    CHECK(one[0].p_mpp_w == doctest::Approx(mpp.op.p_out_w).epsilon(1e-12));
    CHECK(one[0].r_match_ohm == doctest::Approx(mpp.op.r_l_ohm).epsilon(1e-12));

    // two endpoints only
    CHECK(frequency_sweep(m, {300e3, 400e3}).size() == 2);

    // peak-power frequency differs from the peak-open-circuit-voltage frequency
    const auto rf = resonance_frequencies(m);
    std::vector<double> freqs;
    for (int i = 0; i < 200; ++i)
        freqs.push_back(0.9 * rf.f_short_hz +
                        (1.1 * rf.f_open_hz - 0.9 * rf.f_short_hz) * i / 199.0);
    const auto rows = frequency_sweep(m, freqs, 1024);
    std::size_t best_p = 0, best_v = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].p_mpp_w > rows[best_p].p_mpp_w) best_p = i;
        if (rows[i].v_oc_v > rows[best_v].v_oc_v) best_v = i;
    }
    CHECK(best_p != best_v);

    // open-circuit amplitude: frozen CAS value at 10*f_open, capacitive
    // divider limit at low frequency
    CHECK(open_circuit_amplitude(m, kTwoPi * 10.0 * rf.f_open_hz) ==
          doctest::Approx(0.0013196752297357387).epsilon(1e-9));
    const double divider = m.v_s_amp_v * m.c_m_f / (m.c_m_f + m.c_p_f);
    CHECK(open_circuit_amplitude(m, kTwoPi * rf.f_short_hz / 1000.0) ==
          doctest::Approx(divider).epsilon(1e-3));

    // parallel evaluation is bit-identical to sequential
    const auto par = frequency_sweep(m, freqs, 1024, 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(par[i].p_mpp_w == rows[i].p_mpp_w);
        CHECK(par[i].v_oc_v == rows[i].v_oc_v);
    }

    CHECK_THROWS_AS(frequency_sweep(m, {}), input_error);
    CHECK_THROWS_AS(frequency_sweep(m, {-1.0}), std::domain_error);
}
