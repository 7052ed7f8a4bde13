#pragma once

// Extraction of BVD parameters from measured impedance sweeps.
//
// Minimizes the summed squared relative error of the real and imaginary
// terminal-impedance components with a damped (Levenberg-Marquardt) least
// squares iteration over log-parameters, which keeps R_M/L_M/C_M/C_P
// positive without constraints. The source amplitude is not observable from
// impedance and passes through unchanged.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mewpt/bvd.hpp"
#include "mewpt/errors.hpp"

namespace mewpt {

struct FitOptions {
    int max_iterations = 200;
    double step_tol = 1e-9;  // converged when the largest relative parameter step is below this
};

struct FitResult {
    BvdModel model;
    double residual = 0.0;  // RMS relative residual over all Re/Im components
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Thrown when the iteration budget runs out; carries the best fit found.
class fit_error : public std::runtime_error {
public:
    fit_error(const std::string& what, FitResult best_so_far)
        : std::runtime_error(what), best(std::move(best_so_far)) {}
    FitResult best;
};

namespace detail {

inline double rms_relative_residual(const BvdModel& m,
                                    const std::vector<ImpedanceSample>& samples) {
    double s = 0.0;
    for (const auto& smp : samples) {
        const double w = 2.0 * std::numbers::pi * smp.freq_hz;
        const std::complex<double> z = terminal_impedance(m, w);
        const double mag = std::max(std::hypot(smp.z_re_ohm, smp.z_im_ohm), 1e-30);
        const double er = (z.real() - smp.z_re_ohm) / mag;
        const double ei = (z.imag() - smp.z_im_ohm) / mag;
        s += er * er + ei * ei;
    }
    return std::sqrt(s / (2.0 * samples.size()));
}

// Solve a 4x4 linear system in place by Gaussian elimination with partial pivoting.
inline bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int col = 3; col >= 0; --col) {
        for (int r = 0; r < col; ++r) {
            const double f = a[r][col] / a[col][col];
            b[r] -= f * b[col];
        }
        b[col] /= a[col][col];
    }
    return true;
}

}  // namespace detail

/// Data-driven starting point: series resonance from the |Z| minimum, open
/// resonance from the |Z| maximum, C_P from the low-frequency capacitive
/// asymptote, R_M from |Z| at the minimum.
inline BvdModel initial_guess(const std::vector<ImpedanceSample>& samples) {
    std::size_t i_min = 0, i_max = 0;
    double z_min = 1e300, z_max = -1.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double mag = std::hypot(samples[i].z_re_ohm, samples[i].z_im_ohm);
        if (mag < z_min) {
            z_min = mag;
            i_min = i;
        }
        if (mag > z_max) {
            z_max = mag;
            i_max = i;
        }
    }
    const double f_short = samples[i_min].freq_hz;
    double f_open = samples[i_max].freq_hz;

    BvdModel m;
    const double w0 = 2.0 * std::numbers::pi * samples.front().freq_hz;
    const double mag0 = std::hypot(samples.front().z_re_ohm, samples.front().z_im_ohm);
    m.c_p_f = 1.0 / (w0 * std::max(mag0, 1e-9));
    m.r_m_ohm = std::max(z_min, 1e-3);
    double ratio2 = (f_open / f_short) * (f_open / f_short) - 1.0;
    if (!(ratio2 > 0.0)) ratio2 = 1e-3;  // degenerate sweep: assume a narrow split
    m.c_m_f = m.c_p_f * ratio2;
    const double w_short = 2.0 * std::numbers::pi * f_short;
    m.l_m_h = 1.0 / (w_short * w_short * m.c_m_f);
    m.v_s_amp_v = 1.0;
    return m;
}

inline FitResult fit_bvd(const std::vector<ImpedanceSample>& samples,
                         const std::optional<BvdModel>& init = std::nullopt,
                         const FitOptions& opt = {}) {
    if (samples.size() < 8)
        throw input_error("fit_bvd: need at least 8 impedance samples spanning both resonances");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].freq_hz > 0.0)) throw input_error("fit_bvd: frequencies must be positive");
        if (i > 0 && !(samples[i].freq_hz > samples[i - 1].freq_hz))
            throw input_error("fit_bvd: frequencies must be strictly increasing");
        if (!std::isfinite(samples[i].z_re_ohm) || !std::isfinite(samples[i].z_im_ohm))
            throw input_error("fit_bvd: impedance components must be finite");
    }

    BvdModel m = init ? *init : initial_guess(samples);
    const double v_s_passthrough = m.v_s_amp_v;

    // residual vector in relative form, 2 entries per sample
    const std::size_t n = samples.size();
    auto residuals = [&](const BvdModel& model, std::vector<double>& r) {
        r.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 2.0 * std::numbers::pi * samples[i].freq_hz;
            const std::complex<double> z = terminal_impedance(model, w);
            const double mag =
                std::max(std::hypot(samples[i].z_re_ohm, samples[i].z_im_ohm), 1e-30);
            r[2 * i] = (z.real() - samples[i].z_re_ohm) / mag;
            r[2 * i + 1] = (z.imag() - samples[i].z_im_ohm) / mag;
        }
    };

    std::array<double, 4> p = {std::log(m.r_m_ohm), std::log(m.l_m_h), std::log(m.c_m_f),
                               std::log(m.c_p_f)};
    auto model_of = [&](const std::array<double, 4>& q) {
        BvdModel mm;
        mm.r_m_ohm = std::exp(q[0]);
        mm.l_m_h = std::exp(q[1]);
        mm.c_m_f = std::exp(q[2]);
        mm.c_p_f = std::exp(q[3]);
        mm.v_s_amp_v = v_s_passthrough;
        return mm;
    };

    std::vector<double> r, rp, rm_;
    residuals(m, r);
    auto sq_sum = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    double cost = sq_sum(r);

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    const double jac_eps = 1e-6;

    for (; iter < opt.max_iterations; ++iter) {
        // numeric Jacobian in log-parameter space (central differences)
        std::vector<std::array<double, 4>> jac(2 * n);
        for (int k = 0; k < 4; ++k) {
            std::array<double, 4> q = p;
            q[k] += jac_eps;
            residuals(model_of(q), rp);
            q[k] = p[k] - jac_eps;
            residuals(model_of(q), rm_);
            for (std::size_t i = 0; i < 2 * n; ++i) jac[i][k] = (rp[i] - rm_[i]) / (2.0 * jac_eps);
        }

        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (std::size_t i = 0; i < 2 * n; ++i)
            for (int a = 0; a < 4; ++a) {
                jtr[a] += jac[i][a] * r[i];
                for (int b = 0; b < 4; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }

        bool stepped = false;
        double step_norm = 0.0;
        for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
            std::array<std::array<double, 4>, 4> a = jtj;
            for (int k = 0; k < 4; ++k) a[k][k] += lambda * std::max(jtj[k][k], 1e-30);
            std::array<double, 4> delta = jtr;
            for (double& d : delta) d = -d;
            if (!detail::solve4(a, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::array<double, 4> q = p;
            for (int k = 0; k < 4; ++k) q[k] += delta[k];
            std::vector<double> rn;
            residuals(model_of(q), rn);
            const double cn = sq_sum(rn);
            if (cn < cost) {
                p = q;
                r = std::move(rn);
                cost = cn;
                lambda = std::max(lambda * 0.3, 1e-12);
                step_norm = 0.0;
                for (double d : delta) step_norm = std::max(step_norm, std::abs(d));
                stepped = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped || step_norm < opt.step_tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    FitResult res;
    res.model = model_of(p);
    res.residual = detail::rms_relative_residual(res.model, samples);
    res.iterations = iter;
    res.converged = converged;

    // flag sweeps that do not bracket both resonances: the extremum of |Z|
    // sitting at a sweep edge leaves that resonance unconstrained
    std::size_t i_min = 0, i_max = 0;
    double z_min = 1e300, z_max = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::hypot(samples[i].z_re_ohm, samples[i].z_im_ohm);
        if (mag < z_min) {
            z_min = mag;
            i_min = i;
        }
        if (mag > z_max) {
            z_max = mag;
            i_max = i;
        }
    }
    if (i_min == 0 || i_min == n - 1)
        res.warnings.push_back(
            "series-resonance |Z| minimum lies at the sweep edge; R_M/L_M/C_M confidence is wide");
    if (i_max == 0 || i_max == n - 1)
        res.warnings.push_back(
            "open-circuit-resonance |Z| maximum lies at the sweep edge; C_P confidence is wide");

    if (!converged) {
        std::ostringstream os;
        os << "fit_bvd: no convergence after " << opt.max_iterations
           << " iterations (residual " << res.residual << ")";
        throw fit_error(os.str(), res);
    }
    return res;
}

/// Terminal impedance synthesized from a model over a frequency list;
/// convenience for building fit fixtures and round-trip checks.
inline std::vector<ImpedanceSample> synthesize_sweep(const BvdModel& m,
                                                     const std::vector<double>& freqs_hz) {
    std::vector<ImpedanceSample> out;
    out.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        const std::complex<double> z = terminal_impedance(m, 2.0 * std::numbers::pi * f);
        out.push_back({f, z.real(), z.imag()});
    }
    return out;
}

}  // namespace mewpt
