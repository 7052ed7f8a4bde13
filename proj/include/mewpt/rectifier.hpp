#pragma once

// Closed-form analysis of a BVD transducer driving an ideal full-bridge
// rectifier. Under the fundamental-tone approximation the nonlinear
// rectifier + C_P network reduces to a linear equivalent impedance Z_E(theta),
// where theta is the conduction-angle parameter: within each half-cycle the
// bridge conducts for phase in [theta, pi), so Duty_RECT = 1 - theta/pi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mewpt/bvd.hpp"

namespace mewpt {

struct OperatingPoint {
    double theta_rad = 0.0;
    double duty_rect = 1.0;  // 1 - theta/pi
    double v_rect_v = 0.0;
    double i_0_a = 0.0;      // equivalent current amplitude
    std::complex<double> z_e_ohm{0.0, 0.0};
    double r_l_ohm = 0.0;    // +inf at theta = pi
    double p_out_w = 0.0;
    double omega = 0.0;
};

struct FundamentalComponent {
    double cos_coeff_v = 0.0;  // <= 0 for theta in [0, pi]
    double sin_coeff_v = 0.0;  // >= 0
};

struct FrequencyRow {
    double freq_hz = 0.0;
    double r_match_ohm = 0.0;
    double p_mpp_w = 0.0;
    double v_oc_v = 0.0;
};

namespace detail {
inline void check_theta(double theta, const char* who) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
        throw std::domain_error(std::string(who) + ": theta must be in [0, pi]");
}
inline void check_positive(double v, const char* who, const char* name) {
    if (!(v > 0.0)) throw std::domain_error(std::string(who) + ": " + name + " must be positive");
}
}  // namespace detail

/// Rectified DC level as a function of the conduction angle.
inline double v_rect_of_theta(double theta, double i_0, double omega, double c_p) {
    detail::check_theta(theta, "v_rect_of_theta");
    detail::check_positive(omega, "v_rect_of_theta", "omega");
    detail::check_positive(c_p, "v_rect_of_theta", "c_p");
    return i_0 / (2.0 * omega * c_p) * (1.0 - std::cos(theta));
}

/// Piecewise transducer terminal voltage over one carrier period.
/// phase is taken modulo 2*pi; the four branches join continuously and the
/// waveform is half-wave antisymmetric.
inline double vac_waveform(double theta, double i_0, double omega, double c_p, double phase) {
    detail::check_theta(theta, "vac_waveform");
    detail::check_positive(i_0, "vac_waveform", "i_0");
    detail::check_positive(omega, "vac_waveform", "omega");
    detail::check_positive(c_p, "vac_waveform", "c_p");
    const double two_pi = 2.0 * std::numbers::pi;
    double ph = std::fmod(phase, two_pi);
    if (ph < 0.0) ph += two_pi;
    const double v_rect = i_0 / (2.0 * omega * c_p) * (1.0 - std::cos(theta));
    const double k = i_0 / (omega * c_p);
    if (ph < theta) return k * (1.0 - std::cos(ph)) - v_rect;
    if (ph < std::numbers::pi) return v_rect;
    if (ph < theta + std::numbers::pi) return v_rect - k * (1.0 + std::cos(ph));
    return -v_rect;
}

/// Fourier fundamental of the piecewise waveform:
/// V_fund(t) = cos_coeff*cos(omega t) + sin_coeff*sin(omega t).
inline FundamentalComponent fundamental_component(double theta, double i_0, double omega,
                                                  double c_p) {
    detail::check_theta(theta, "fundamental_component");
    detail::check_positive(omega, "fundamental_component", "omega");
    detail::check_positive(c_p, "fundamental_component", "c_p");
    const double scale = i_0 / (2.0 * std::numbers::pi * omega * c_p);
    const double s = std::sin(theta);
    return {scale * (std::sin(2.0 * theta) - 2.0 * theta), scale * 2.0 * s * s};
}

/// Equivalent interface impedance Z_E(theta) seen by the motional branch.
inline std::complex<double> equivalent_impedance(double theta, double omega, double c_p) {
    detail::check_theta(theta, "equivalent_impedance");
    detail::check_positive(omega, "equivalent_impedance", "omega");
    detail::check_positive(c_p, "equivalent_impedance", "c_p");
    const double scale = 1.0 / (std::numbers::pi * omega * c_p);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return {scale * s * s, scale * (s * c - theta)};
}

/// Equivalent DC load implied by a conduction angle.
inline double load_of_theta(double theta, double omega, double c_p) {
    detail::check_theta(theta, "load_of_theta");
    const double c = std::cos(theta);
    if (1.0 + c <= 0.0) return std::numeric_limits<double>::infinity();
    return std::numbers::pi / (2.0 * omega * c_p) * (1.0 - c) / (1.0 + c);
}

/// Inverse of load_of_theta: cos(theta) = (K - R_L)/(K + R_L) with K = pi/(2 omega C_P).
inline double theta_from_load(double r_l, double omega, double c_p) {
    if (!(r_l >= 0.0)) throw std::domain_error("theta_from_load: r_l must be non-negative");
    detail::check_positive(omega, "theta_from_load", "omega");
    detail::check_positive(c_p, "theta_from_load", "c_p");
    if (std::isinf(r_l)) return std::numbers::pi;
    const double k = std::numbers::pi / (2.0 * omega * c_p);
    const double c = (k - r_l) / (k + r_l);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

/// Full operating point for a model at (omega, theta). theta alone determines
/// every field; no iteration is involved. p_out uses the |Z_M+Z_E| form, which
/// is algebraically identical to V_RECT^2/R_L.
inline OperatingPoint operating_point(const BvdModel& m, double omega, double theta) {
    detail::check_theta(theta, "operating_point");
    detail::check_positive(omega, "operating_point", "omega");
    OperatingPoint op;
    op.theta_rad = theta;
    op.duty_rect = 1.0 - theta / std::numbers::pi;
    op.omega = omega;
    op.z_e_ohm = equivalent_impedance(theta, omega, m.c_p_f);
    const std::complex<double> z_total = motional_impedance(m, omega) + op.z_e_ohm;
    const double z_mag = std::abs(z_total);
    op.i_0_a = m.v_s_amp_v / z_mag;
    op.v_rect_v = v_rect_of_theta(theta, op.i_0_a, omega, m.c_p_f);
    op.r_l_ohm = load_of_theta(theta, omega, m.c_p_f);
    const double s = std::sin(theta);
    op.p_out_w = s * s / (2.0 * std::numbers::pi * omega * m.c_p_f) *
                 (m.v_s_amp_v * m.v_s_amp_v) / (z_mag * z_mag);
    return op;
}

struct MppResult {
    OperatingPoint op;
    std::size_t grid_index = 0;  // argmax index on the uniform theta grid
};

/// Maximum power point by uniform grid sweep over [0, pi] plus golden-section
/// refinement around the best grid cell. The maximizing theta is independent
/// of v_s_amp, so the grid index is stable under source-amplitude scaling.
inline MppResult find_mpp(const BvdModel& m, double omega, std::size_t grid_points = 1024) {
    if (grid_points < 64) throw std::invalid_argument("find_mpp: grid_points must be >= 64");
    const double pi = std::numbers::pi;
    auto power = [&](double theta) {
        const std::complex<double> z =
            motional_impedance(m, omega) + equivalent_impedance(theta, omega, m.c_p_f);
        const double s = std::sin(theta);
        return s * s / (2.0 * pi * omega * m.c_p_f) * (m.v_s_amp_v * m.v_s_amp_v) / std::norm(z);
    };

    std::size_t best_i = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double theta = pi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double p = power(theta);
        if (p > best_p) {
            best_p = p;
            best_i = i;
        }
    }

    const double step = pi / static_cast<double>(grid_points - 1);
    double lo = (best_i == 0) ? 0.0 : (static_cast<double>(best_i) - 1.0) * step;
    double hi = (best_i + 1 >= grid_points) ? pi : (static_cast<double>(best_i) + 1.0) * step;

    // golden-section maximization
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = power(c), fd = power(d);
    while (b - a > 1e-6) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = power(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = power(d);
        }
    }
    double theta_star = 0.5 * (a + b);
    if (power(theta_star) < best_p) theta_star = pi * static_cast<double>(best_i) /
                                                 static_cast<double>(grid_points - 1);

    MppResult res;
    res.op = operating_point(m, omega, theta_star);
    res.grid_index = best_i;
    return res;
}

/// Steady-state open-circuit terminal amplitude (capacitive divider).
inline double open_circuit_amplitude(const BvdModel& m, double omega) {
    detail::check_positive(omega, "open_circuit_amplitude", "omega");
    const std::complex<double> zcp{0.0, -1.0 / (omega * m.c_p_f)};
    return std::abs(m.v_s_amp_v * zcp / (motional_impedance(m, omega) + zcp));
}

/// Per-frequency matched load, maximum power, and open-circuit amplitude.
/// Rows are independent; with max_threads > 1 they are computed in parallel
/// chunks and written by index, so the result is order-independent.
inline std::vector<FrequencyRow> frequency_sweep(const BvdModel& m,
                                                 const std::vector<double>& freqs_hz,
                                                 std::size_t grid_points = 1024,
                                                 unsigned max_threads = 1) {
    if (freqs_hz.empty()) throw input_error("frequency_sweep: empty frequency list");
    for (double f : freqs_hz)
        if (!(f > 0.0)) throw std::domain_error("frequency_sweep: frequencies must be positive");

    std::vector<FrequencyRow> rows(freqs_hz.size());
    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double omega = 2.0 * std::numbers::pi * freqs_hz[i];
            const MppResult mpp = find_mpp(m, omega, grid_points);
            rows[i] = {freqs_hz[i], mpp.op.r_l_ohm, mpp.op.p_out_w,
                       open_circuit_amplitude(m, omega)};
        }
    };

    const unsigned threads = std::max(1u, max_threads);
    if (threads == 1 || freqs_hz.size() < 2 * threads) {
        fill(0, rows.size());
        return rows;
    }
    std::vector<std::future<void>> futs;
    const std::size_t chunk = (rows.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk;
        if (b >= rows.size()) break;
        const std::size_t e = std::min(rows.size(), b + chunk);
        futs.push_back(std::async(std::launch::async, fill, b, e));
    }
    for (auto& f : futs) f.get();
    return rows;
}

}  // namespace mewpt
