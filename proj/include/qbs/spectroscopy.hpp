// spectroscopy.hpp — Recovering Im S[ω, ω] from the simulated qubit phase drift
//
// With F(t) = λ(sin 2ωt + cos ωt), the long-time phase of the qubit drifts at
// the rate d Im χ/dt = λ³ Im S[ω, ω] / 8 + O(λ⁵). Only the imaginary part of
// the bispectrum enters.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qbs/analytic.hpp"
#include "qbs/parallel.hpp"
#include "qbs/phase_space.hpp"
#include "qbs/stats.hpp"

namespace qbs {

constexpr double k_phase_rate_divisor = 8.0;

// Drift rate predicted from a bispectrum value.
inline double predicted_phase_rate(double lambda, double im_s) {
    return lambda * lambda * lambda * im_s / k_phase_rate_divisor;
}

// Default duration: about 400/γ rounded to whole filter periods.
inline double default_duration(double omega, double gamma = 1.0) {
    require(omega > 0.0 && gamma > 0.0, "default_duration: omega and gamma must be > 0");
    return period_aligned(400.0 / gamma, 2.0 * M_PI / omega);
}

struct PhaseRate {
    double lambda{0.0};
    double rate{0.0};
    double rate_stderr{0.0};
    bool flagged{false};
};

// Drift rate for each λ, parallel over λ.
inline std::vector<PhaseRate> phase_rates(const CavityParams& p, double omega, const std::vector<double>& lambdas,
                                          double t_f, const IntegratorConfig& cfg, int threads = 1) {
    require(omega > 0.0, "omega must be > 0");
    const double period = 2.0 * M_PI / omega;
    require(is_period_multiple(t_f, period), "t_f must be an integer multiple of 2π/ω");
    const auto times = second_half_checkpoints(t_f, period);
    std::vector<PhaseRate> out(lambdas.size());
    parallel_for(lambdas.size(), threads, [&](std::size_t i) {
        const auto fs = FilterSpec::two_tone(lambdas[i], omega, t_f);
        const auto shift = frequency_shift(p, fs, cfg, times);
        out[i] = PhaseRate{lambdas[i], shift.slope, shift.slope_stderr, shift.flagged};
    });
    return out;
}

struct ImBispectrumEstimate {
    double estimate{0.0};
    double stderr_{0.0};
    double quintic{0.0}; // λ⁵ coefficient of the rate fit
    double condition{0.0};
    std::vector<PhaseRate> rates;
};

inline ImBispectrumEstimate estimate_im_bispectrum(const CavityParams& p, double omega,
                                                   const std::vector<double>& lambdas, double t_f,
                                                   const IntegratorConfig& cfg, int threads = 1) {
    p.validate();
    require(omega > 0.0, "omega must be > 0");
    require(lambdas.size() >= 3, "need at least 3 coupling strengths for the λ³ + λ⁵ fit");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        require(lambdas[i] > 0.0 && std::isfinite(lambdas[i]), "couplings must be positive");
        if (i > 0) require(lambdas[i] > lambdas[i - 1], "couplings must be distinct and ascending");
    }
    const auto n = static_cast<Eigen::Index>(lambdas.size());
    Eigen::MatrixXd X(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = lambdas[static_cast<std::size_t>(i)];
        X(i, 0) = l * l * l;
        X(i, 1) = l * l * l * l * l;
    }
    ImBispectrumEstimate out;
    {
        Eigen::VectorXd dummy = Eigen::VectorXd::Zero(n);
        out.condition = ols(X, dummy).condition;
    }
    require(out.condition < 1e6, "λ set gives an ill-conditioned λ³ + λ⁵ fit");

    out.rates = phase_rates(p, omega, lambdas, t_f, cfg, threads);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = out.rates[static_cast<std::size_t>(i)].rate;
    const LinearFit fit = ols(X, y);

    // Propagate the per-λ slope errors alongside the fit misfit.
    const Eigen::MatrixXd pinv = (X.transpose() * X).ldlt().solve(X.transpose());
    double prop = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        prop += std::pow(pinv(0, i) * out.rates[static_cast<std::size_t>(i)].rate_stderr, 2);
    const double a_err = std::sqrt(fit.stderr_[0] * fit.stderr_[0] + prop);

    out.estimate = k_phase_rate_divisor * fit.coef[0];
    out.quintic = fit.coef[1];
    out.stderr_ = k_phase_rate_divisor * a_err;
    return out;
}

struct ScalingExponent {
    double exponent{std::numeric_limits<double>::quiet_NaN()};
    bool resolved{false};
    std::vector<double> used_lambdas;
    std::vector<PhaseRate> rates;
};

// Log-log slope of |rate| against λ over the smaller half of the λ set
// (at least three points), ignoring drifts below the integrator noise floor.
inline ScalingExponent scaling_exponent(const CavityParams& p, double omega, const std::vector<double>& lambdas,
                                        double t_f, const IntegratorConfig& cfg, int threads = 1) {
    require(lambdas.size() >= 4, "need at least 4 coupling strengths");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        require(lambdas[i] > 0.0, "couplings must be positive");
        if (i > 0) require(lambdas[i] > lambdas[i - 1], "couplings must be ascending");
    }
    require(lambdas.back() >= 10.0 * lambdas.front() * (1.0 - 1e-12), "couplings must span at least one decade");
    ScalingExponent out;
    out.rates = phase_rates(p, omega, lambdas, t_f, cfg, threads);

    std::vector<double> lx, ly;
    for (const auto& r : out.rates) {
        if (std::abs(r.rate) * t_f < 100.0 * cfg.abs_tol) continue;
        lx.push_back(r.lambda);
    }
    if (lx.size() < 3) return out;
    const std::size_t take = std::max<std::size_t>(3, lx.size() / 2);
    lx.resize(take);
    for (double l : lx) {
        for (const auto& r : out.rates)
            if (r.lambda == l) ly.push_back(std::log(std::abs(r.rate)));
        out.used_lambdas.push_back(l);
    }
    for (double& l : lx) l = std::log(l);
    out.exponent = line_fit(lx, ly).coef[1];
    out.resolved = true;
    return out;
}

} // namespace qbs
