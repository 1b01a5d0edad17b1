// phase_space.hpp — Qubit coherence under a filtered photon-number coupling via Gaussian phase-space ODEs
//
// The coherence obeys ln<σ-(t_f)> = χ = −(ν_th + ν_dr), with the Gaussian
// ansatz variables evolving as
//   ν_th' = iλF(σ − ½)
//   σ'    = γ(n_th + ½) − γσ − iλFσ² + iλF/4
//   ν_dr' = (iλ/2) F (x̄² + p̄²)
//   x̄'    = −δp̄ + √2 Im f − iλFσx̄ − γx̄/2
//   p̄'    =  δx̄ + √2 Re f − iλFσp̄ − γp̄/2
// where F is the unit-strength filter shape.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"
#include "qbs/model.hpp"
#include "qbs/ode.hpp"
#include "qbs/stats.hpp"

namespace qbs {

struct PhaseSpaceState {
    cplx nu_th{0.0};
    cplx nu_dr{0.0};
    cplx sigma_s{0.5};
    cplx x_bar{0.0};
    cplx p_bar{0.0};

    cplx chi() const { return -(nu_th + nu_dr); }

    Eigen::VectorXcd pack() const {
        Eigen::VectorXcd v(5);
        v << nu_th, sigma_s, nu_dr, x_bar, p_bar;
        return v;
    }
    static PhaseSpaceState unpack(const Eigen::VectorXcd& v) {
        return PhaseSpaceState{v[0], v[2], v[1], v[3], v[4]};
    }
};

enum class OdeMethod { dopri5 };

struct IntegratorConfig {
    double rel_tol{1e-10};
    double abs_tol{1e-12};
    double max_step{0.05};
    OdeMethod method{OdeMethod::dopri5};

    void validate() const {
        require(rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0, "IntegratorConfig: tolerances must be > 0");
    }
    OdeTolerances tolerances() const {
        OdeTolerances t;
        t.rel_tol = rel_tol;
        t.abs_tol = abs_tol;
        t.max_step = max_step;
        t.initial_step = std::min(1e-3, max_step);
        return t;
    }
};

// F = 0 fixed point: the stationary state the coupling is switched on into.
inline PhaseSpaceState steady_init(const CavityParams& p) {
    p.validate();
    Eigen::Matrix2d A;
    A << -p.gamma / 2.0, -p.delta, p.delta, -p.gamma / 2.0;
    const Eigen::Vector2d b(-std::sqrt(2.0) * p.drive_im, -std::sqrt(2.0) * p.drive_re);
    const Eigen::Vector2d xp = A.partialPivLu().solve(b);
    PhaseSpaceState s;
    s.sigma_s = p.n_th + 0.5;
    s.x_bar = xp[0];
    s.p_bar = xp[1];
    return s;
}

namespace detail {

struct PhaseSpaceRhs {
    CavityParams p;
    const FilterSpec* fs;

    Eigen::VectorXcd operator()(double t, const Eigen::VectorXcd& y) const {
        const cplx I(0.0, 1.0);
        const double lf = fs->lambda * fs->shape_at(t);
        const cplx s = y[1], x = y[3], q = y[4];
        const double g = p.gamma;
        const double r2 = std::sqrt(2.0);
        Eigen::VectorXcd d(5);
        d[0] = I * lf * (s - 0.5);
        d[1] = g * (p.n_th + 0.5) - g * s - I * lf * s * s + I * lf / 4.0;
        d[2] = 0.5 * I * lf * (x * x + q * q);
        d[3] = -p.delta * q + r2 * p.drive_im - I * lf * s * x - g * x / 2.0;
        d[4] = p.delta * x + r2 * p.drive_re - I * lf * s * q - g * q / 2.0;
        return d;
    }
};

} // namespace detail

/// States at each checkpoint time (ascending, within [0, fs.t_f]).
inline std::vector<PhaseSpaceState> integrate_states(const CavityParams& p, const FilterSpec& fs,
                                                     const IntegratorConfig& cfg,
                                                     const std::vector<double>& checkpoints) {
    p.validate();
    fs.validate();
    cfg.validate();
    for (double t : checkpoints) require(t >= 0.0 && t <= fs.t_f, "checkpoint outside [0, t_f]");
    const PhaseSpaceState init = steady_init(p);
    std::vector<PhaseSpaceState> out;
    out.reserve(checkpoints.size());
    if (fs.lambda == 0.0) {
        // Every derivative vanishes at the fixed point.
        out.assign(checkpoints.size(), init);
        return out;
    }
    detail::PhaseSpaceRhs rhs{p, &fs};
    const auto ys = integrate_dopri5(rhs, 0.0, init.pack(), checkpoints, cfg.tolerances());
    for (const auto& y : ys) out.push_back(PhaseSpaceState::unpack(y));
    return out;
}

inline std::vector<cplx> chi_at(const CavityParams& p, const FilterSpec& fs, const IntegratorConfig& cfg,
                                const std::vector<double>& times) {
    std::vector<cplx> out;
    for (const auto& s : integrate_states(p, fs, cfg, times)) out.push_back(s.chi());
    return out;
}

/// χ(t_f) = ln of the qubit coherence at the end of the filter window.
inline cplx integrate_chi(const CavityParams& p, const FilterSpec& fs, const IntegratorConfig& cfg) {
    return chi_at(p, fs, cfg, {fs.t_f})[0];
}

// Common period of the filter's harmonic components; 0 for a constant filter.
inline double fundamental_period(const FilterSpec& fs) {
    double wmin = std::numeric_limits<double>::infinity();
    for (const auto& c : fs.components)
        if (c.frequency > 0.0) wmin = std::min(wmin, c.frequency);
    if (!std::isfinite(wmin)) return 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double w0 = wmin / k;
        bool ok = true;
        for (const auto& c : fs.components) {
            if (c.frequency == 0.0) continue;
            const double m = c.frequency / w0;
            if (std::abs(m - std::round(m)) > 1e-9 * m) {
                ok = false;
                break;
            }
        }
        if (ok) return 2.0 * M_PI / w0;
    }
    throw std::invalid_argument("filter components are not commensurate");
}

inline bool is_period_multiple(double t, double period) {
    if (period == 0.0) return true;
    const double m = t / period;
    return m >= 1.0 - 1e-9 && std::abs(m - std::round(m)) <= 1e-9 * std::max(1.0, m);
}

// Integer number of periods closest to target (at least one).
inline double period_aligned(double target, double period) {
    if (period == 0.0) return target;
    return period * std::max(1.0, std::round(target / period));
}

struct FrequencyShift {
    double slope{0.0};
    double intercept{0.0};
    double slope_stderr{0.0};
    double residual{0.0};
    bool flagged{false};
    std::vector<double> times;
    std::vector<double> im_chi;
};

// Long-time rate d Im χ / dt_f from a straight-line fit over the given
// durations, all evaluated on one trajectory.
inline FrequencyShift frequency_shift(const CavityParams& p, const FilterSpec& fs, const IntegratorConfig& cfg,
                                      const std::vector<double>& t_f_list) {
    require(t_f_list.size() >= 2, "frequency_shift: need >= 2 durations");
    const double period = fundamental_period(fs);
    for (std::size_t i = 0; i < t_f_list.size(); ++i) {
        require(t_f_list[i] > 0.0, "frequency_shift: durations must be > 0");
        if (i > 0) require(t_f_list[i] > t_f_list[i - 1], "frequency_shift: durations must be ascending");
        require(is_period_multiple(t_f_list[i], period),
                "frequency_shift: durations must be multiples of the filter period");
    }
    FilterSpec run = fs;
    run.t_f = t_f_list.back();
    FrequencyShift out;
    out.times = t_f_list;
    for (const auto& c : chi_at(p, run, cfg, t_f_list)) out.im_chi.push_back(c.imag());
    const LinearFit fit = line_fit(out.times, out.im_chi);
    out.intercept = fit.coef[0];
    out.slope = fit.coef[1];
    out.slope_stderr = fit.stderr_[1];
    out.residual = fit.residual_rms;
    // The periodic part is sampled in phase and the switch-on transient is
    // exponentially small; anything else is a non-convergent slope.
    const double span = out.times.back() - out.times.front();
    const double scale = std::abs(out.slope) * span;
    out.flagged = out.residual > 1e-3 * scale + 1e4 * cfg.abs_tol;
    return out;
}

// Durations at every filter period in [t_f/2, t_f].
inline std::vector<double> second_half_checkpoints(double t_f, double period, std::size_t max_points = 200) {
    require(t_f > 0.0, "t_f must be > 0");
    std::vector<double> out;
    if (period == 0.0) {
        const std::size_t n = std::max<std::size_t>(2, std::min<std::size_t>(max_points, 21));
        for (std::size_t i = 0; i < n; ++i) out.push_back(t_f * (0.5 + 0.5 * static_cast<double>(i) / (n - 1)));
        return out;
    }
    const long n_total = std::lround(t_f / period);
    require(n_total >= 2, "t_f must span at least two filter periods");
    const long first = (n_total + 1) / 2;
    const long count = n_total - first + 1;
    const long stride = std::max<long>(1, (count + static_cast<long>(max_points) - 1) / static_cast<long>(max_points));
    for (long k = n_total; k >= first; k -= stride) out.push_back(period * static_cast<double>(k));
    std::reverse(out.begin(), out.end());
    if (out.size() < 2) out.insert(out.begin(), period * static_cast<double>(first - 1));
    return out;
}

} // namespace qbs
