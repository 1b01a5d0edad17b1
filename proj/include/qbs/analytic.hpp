// analytic.hpp — Closed-form Keldysh cumulants and bispectra of cavity photon shot noise
//
// Conventions: S[w1, w2] = ∫ dτ1 dτ2 e^{-i(w1 τ1 + w2 τ2)} C3(0, τ1, τ2), with
// w3 = -(w1 + w2). All formulas are evaluated term by term over the ordered
// index pairs (α ≠ β) of the frequency triple.

#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qbs/model.hpp"

namespace qbs {

struct FreqTriple {
    double omega1{0.0};
    double omega2{0.0};

    constexpr FreqTriple() = default;
    constexpr FreqTriple(double w1, double w2) : omega1(w1), omega2(w2) {}

    double omega3() const { return -(omega1 + omega2); }
    std::array<double, 3> all() const { return {omega1, omega2, omega3()}; }
};

// Sign of every additive term of the closed forms. All +1 is the physical
// model; flipping one entry produces a mutant used to verify that the
// oracle and identity checks detect transcription errors.
struct FormulaTerms {
    // thermal: C γ² (6γ² + Σ ω²) / Π(γ² + ω²)
    double th_const{1.0};
    double th_num_omega{1.0};
    double th_den_gamma{1.0};
    double th_den_omega{1.0};
    // classical drive shape: (4/γ²) Σ 1/{[1 + 4((ω_α + δ)/γ)²][1 + 4((ω_β − δ)/γ)²]}
    double cl_prefactor{1.0};
    double cl_unit_a{1.0};
    double cl_quad_a{1.0};
    double cl_detuning_a{1.0};
    double cl_unit_b{1.0};
    double cl_quad_b{1.0};
    double cl_detuning_b{1.0};
    // quantum drive shape: −½ Σ (γ/2 + iω_β) / {(γ − iω_α)[(γ/2 + iω_β)² + δ²]}
    double q_prefactor{1.0};
    double q_num_gamma{1.0};
    double q_num_omega{1.0};
    double q_den_gamma{1.0};
    double q_den_omega{1.0};
    double q_sq_gamma{1.0};
    double q_sq_omega{1.0};
    double q_sq_detuning{1.0};

    struct Named {
        const char* name;
        double FormulaTerms::*member;
    };

    static const std::vector<Named>& catalogue() {
        static const std::vector<Named> terms = {
            {"thermal.const", &FormulaTerms::th_const},
            {"thermal.num_omega", &FormulaTerms::th_num_omega},
            {"thermal.den_gamma", &FormulaTerms::th_den_gamma},
            {"thermal.den_omega", &FormulaTerms::th_den_omega},
            {"classical.prefactor", &FormulaTerms::cl_prefactor},
            {"classical.unit_a", &FormulaTerms::cl_unit_a},
            {"classical.quad_a", &FormulaTerms::cl_quad_a},
            {"classical.detuning_a", &FormulaTerms::cl_detuning_a},
            {"classical.unit_b", &FormulaTerms::cl_unit_b},
            {"classical.quad_b", &FormulaTerms::cl_quad_b},
            {"classical.detuning_b", &FormulaTerms::cl_detuning_b},
            {"quantum.prefactor", &FormulaTerms::q_prefactor},
            {"quantum.num_gamma", &FormulaTerms::q_num_gamma},
            {"quantum.num_omega", &FormulaTerms::q_num_omega},
            {"quantum.den_gamma", &FormulaTerms::q_den_gamma},
            {"quantum.den_omega", &FormulaTerms::q_den_omega},
            {"quantum.sq_gamma", &FormulaTerms::q_sq_gamma},
            {"quantum.sq_omega", &FormulaTerms::q_sq_omega},
            {"quantum.sq_detuning", &FormulaTerms::q_sq_detuning},
        };
        return terms;
    }

    static FormulaTerms flipped(const std::string& name) {
        FormulaTerms t;
        for (const auto& n : catalogue())
            if (name == n.name) {
                t.*(n.member) = -1.0;
                return t;
            }
        throw std::invalid_argument("unknown formula term '" + name + "'");
    }
};

namespace detail {

inline double checked_real(cplx z, double scale) {
    // Operations contracted to be real must not leak an imaginary residue.
    assert(std::abs(z.imag()) <= 1e-10 * std::max(1.0, scale));
    (void)scale;
    return z.real();
}

} // namespace detail

// Every closed-form cumulant and spectrum, parameterised by FormulaTerms so
// that a mutated copy can be run through the same checks.
class AnalyticModel {
public:
    AnalyticModel() = default;
    explicit AnalyticModel(FormulaTerms terms) : t_(terms) {}

    const FormulaTerms& terms() const { return t_; }

    /// Drive-independent bispectrum; real and non-negative.
    double s_thermal(const CavityParams& p, FreqTriple w) const {
        const double g = p.gamma;
        const double n = p.n_th;
        const double c = n * (n + 1.0) * (2.0 * n + 1.0);
        const auto om = w.all();
        cplx num = t_.th_const * 6.0 * g * g;
        cplx den = 1.0;
        for (double x : om) {
            num += t_.th_num_omega * x * x;
            den *= t_.th_den_gamma * g * g + t_.th_den_omega * x * x;
        }
        const cplx s = c * g * g * num / den;
        return detail::checked_real(s, std::abs(s));
    }

    /// Temperature-scaled classical frequency profile of the driven part.
    double s_drive_classical_shape(const CavityParams& p, FreqTriple w) const {
        const double g = p.gamma;
        const auto om = w.all();
        cplx sum = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                const double xa = (om[a] + t_.cl_detuning_a * p.delta) / g;
                const double xb = (om[b] - t_.cl_detuning_b * p.delta) / g;
                sum += 1.0 / ((t_.cl_unit_a + t_.cl_quad_a * 4.0 * xa * xa) *
                              (t_.cl_unit_b + t_.cl_quad_b * 4.0 * xb * xb));
            }
        const cplx s = t_.cl_prefactor * 4.0 / (g * g) * sum;
        return detail::checked_real(s, std::abs(s));
    }

    /// Temperature-independent quantum correction of the driven part.
    cplx s_drive_quantum_shape(const CavityParams& p, FreqTriple w) const {
        const double g = p.gamma;
        const cplx I(0.0, 1.0);
        const auto om = w.all();
        cplx sum = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b) continue;
                const cplx num = t_.q_num_gamma * g / 2.0 + t_.q_num_omega * I * om[b];
                const cplx lin = t_.q_den_gamma * g - t_.q_den_omega * I * om[a];
                const cplx half = t_.q_sq_gamma * g / 2.0 + t_.q_sq_omega * I * om[b];
                sum += num / (lin * (half * half + t_.q_sq_detuning * p.delta * p.delta));
            }
        return -0.5 * t_.q_prefactor * sum;
    }

    cplx s_drive(const CavityParams& p, FreqTriple w) const {
        const double n_dr = intracavity_drive_photons(p);
        if (n_dr == 0.0) return 0.0;
        const double th = 2.0 * p.n_th + 1.0;
        return n_dr * (th * th * s_drive_classical_shape(p, w) + s_drive_quantum_shape(p, w));
    }

    cplx s_total(const CavityParams& p, FreqTriple w) const { return s_thermal(p, w) + s_drive(p, w); }

    cplx evaluate(Source which, const CavityParams& p, FreqTriple w) const {
        switch (which) {
        case Source::analytic_thermal: return s_thermal(p, w);
        case Source::analytic_drive: return s_drive(p, w);
        case Source::analytic_total: return s_total(p, w);
        default: break;
        }
        throw std::invalid_argument("AnalyticModel::evaluate: not an analytic source");
    }

private:
    FormulaTerms t_{};
};

inline const AnalyticModel& default_model() {
    static const AnalyticModel m;
    return m;
}

inline double s_thermal(const CavityParams& p, FreqTriple w) {
    p.validate();
    return default_model().s_thermal(p, w);
}
inline double s_drive_classical_shape(const CavityParams& p, FreqTriple w) {
    p.validate();
    return default_model().s_drive_classical_shape(p, w);
}
inline cplx s_drive_quantum_shape(const CavityParams& p, FreqTriple w) {
    p.validate();
    return default_model().s_drive_quantum_shape(p, w);
}
inline cplx s_drive(const CavityParams& p, FreqTriple w) { return default_model().s_drive(p, w); }
inline cplx s_total(const CavityParams& p, FreqTriple w) {
    p.validate();
    return default_model().s_total(p, w);
}

// Zero-frequency value of the driven bispectrum at n_th = 0, per unit n_dr.
// Negative for |δ| above (√3/2)γ.
inline double zero_frequency_drive_value(double gamma, double delta) {
    const auto p = CavityParams::from_drive_photons(gamma, delta, 1.0, 0.0);
    return s_drive(p, {0.0, 0.0}).real();
}

// ---------------------------------------------------------------------------
// Time domain

inline double c_thermal_1(const CavityParams& p) {
    p.validate();
    return p.n_th;
}

inline double c_thermal_2(const CavityParams& p, double tau) {
    p.validate();
    return p.n_th * (p.n_th + 1.0) * std::exp(-p.gamma * std::abs(tau));
}

inline double c_thermal_3(const CavityParams& p, double t1, double t2, double t3) {
    p.validate();
    const double n = p.n_th;
    const double c = n * (n + 1.0) * (2.0 * n + 1.0);
    return c * std::exp(-0.5 * p.gamma * (std::abs(t1 - t2) + std::abs(t2 - t3) + std::abs(t1 - t3)));
}

// Drive-dependent Keldysh third cumulant at pairwise distinct times. For each
// choice m of the time carrying the quadratic fluctuation, with u, v the
// offsets of the other two times from it:
//   (n_dr/2) cos(δ(u − v)) e^{-γ(|u|+|v|)/2} [(2n_th + 1)² − Θ(u)Θ(v)].
// Its Fourier transform is n_dr[(2n_th+1)² S_cl + S_q].
inline double c_drive_3(const CavityParams& p, double t1, double t2, double t3) {
    const double n_dr = intracavity_drive_photons(p);
    const double th = 2.0 * p.n_th + 1.0;
    const std::array<double, 3> t{t1, t2, t3};
    double s = 0.0;
    for (int m = 0; m < 3; ++m) {
        const double u = t[(m + 1) % 3] - t[m];
        const double v = t[(m + 2) % 3] - t[m];
        const double step = (u > 0.0 && v > 0.0) ? 1.0 : 0.0;
        s += std::cos(p.delta * (u - v)) * std::exp(-0.5 * p.gamma * (std::abs(u) + std::abs(v))) *
             (th * th - step);
    }
    return 0.5 * n_dr * s;
}

// C_dr(t, t) = drive part of the cumulant at times (0, t, t), continuous
// limit along the diagonal.
inline double c_drive_equal_time(const CavityParams& p, double t) {
    const double n_dr = intracavity_drive_photons(p);
    const double th2 = (2.0 * p.n_th + 1.0) * (2.0 * p.n_th + 1.0);
    const double a = std::abs(t);
    const double e1 = std::exp(-p.gamma * a);
    const double e2 = std::cos(p.delta * t) * std::exp(-0.5 * p.gamma * a);
    if (t > 0.0) return 0.5 * n_dr * (e1 * (th2 - 1.0) + 2.0 * e2 * th2);
    if (t < 0.0) return 0.5 * n_dr * (e1 * th2 + e2 * (2.0 * th2 - 1.0));
    return 0.5 * n_dr * (e1 * th2 + 2.0 * e2 * th2 - 1.0);
}

// Classical-limit counterpart divided by (2n_th+1)²; symmetric in t.
inline double c_drive_classical_equal_time(const CavityParams& p, double t) {
    const double n_dr = intracavity_drive_photons(p);
    const double a = std::abs(t);
    return 0.5 * n_dr * (std::exp(-p.gamma * a) + 2.0 * std::cos(p.delta * t) * std::exp(-0.5 * p.gamma * a));
}

/// Equal-time third cumulant C3(t, t) for the squeezed-bath cavity.
inline double c3_squeezed_equal_time(const SqueezedBathParams& sp, double t) {
    sp.validate();
    const double g = sp.gamma;
    const double nn = 2.0 * sp.n_cl + 1.0;
    const double ch = std::cosh(2.0 * sp.r);
    const double sh = std::sinh(2.0 * sp.r);
    const double f = std::exp(-g * std::abs(t)) * ch / 4.0;
    const double c_cl = ch * ch + g * g * sh * sh / (g * g + 4.0 * sp.delta * sp.delta) *
                                      (1.0 + 2.0 * std::cos(sp.delta * t + sp.delta * std::abs(t)));
    return nn * nn * nn * f * (c_cl - 1.0 / (nn * nn));
}

// Classical part alone, (2n+1)³ f(t) C_cl(t).
inline double c3_squeezed_classical_equal_time(const SqueezedBathParams& sp, double t) {
    sp.validate();
    const double nn = 2.0 * sp.n_cl + 1.0;
    return c3_squeezed_equal_time(sp, t) + nn * std::exp(-sp.gamma * std::abs(t)) * std::cosh(2.0 * sp.r) / 4.0;
}

// ---------------------------------------------------------------------------

inline BispectrumSurface eval_surface(const CavityParams& p, const FreqGrid2D& grid, Source which,
                                      const AnalyticModel& model = default_model()) {
    p.validate();
    grid.validate();
    BispectrumSurface out;
    out.grid = grid;
    out.source = which;
    out.params = p;
    out.values.resize(static_cast<Eigen::Index>(grid.rows()), static_cast<Eigen::Index>(grid.cols()));
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                model.evaluate(which, p, {grid.omega1_values[i], grid.omega2_values[j]});
    return out;
}

} // namespace qbs
