// model.hpp — Parameter types, filter functions and frequency grids shared by all modules

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"

namespace qbs {

using cplx = std::complex<double>;

// Driven-damped cavity. Units: gamma sets the scale; delta and the drive share
// its units, n_th is dimensionless.
struct CavityParams {
    double gamma{1.0};
    double delta{0.0};
    double drive_re{0.0};
    double drive_im{0.0};
    double n_th{0.0};

    cplx drive() const { return {drive_re, drive_im}; }

    void validate() const {
        require(std::isfinite(gamma) && std::isfinite(delta) && std::isfinite(drive_re) &&
                    std::isfinite(drive_im) && std::isfinite(n_th),
                "CavityParams: all fields must be finite");
        require(gamma > 0.0, "CavityParams: gamma must be > 0");
        require(n_th >= 0.0, "CavityParams: n_th must be >= 0");
    }

    // Real drive amplitude producing a prescribed intracavity photon number.
    static CavityParams from_drive_photons(double gamma, double delta, double n_dr, double n_th) {
        require(n_dr >= 0.0, "n_dr must be >= 0");
        CavityParams p{gamma, delta, 0.0, 0.0, n_th};
        p.drive_re = std::sqrt(n_dr * (gamma * gamma + 4.0 * delta * delta) / 4.0);
        p.validate();
        return p;
    }
};

// Cavity damped through s_r = c cosh r + c^dag sinh r.
struct SqueezedBathParams {
    double gamma{1.0};
    double delta{0.0};
    double r{0.0};
    double n_cl{0.0};

    void validate() const {
        require(std::isfinite(gamma) && std::isfinite(delta) && std::isfinite(r) && std::isfinite(n_cl),
                "SqueezedBathParams: all fields must be finite");
        require(gamma > 0.0, "SqueezedBathParams: gamma must be > 0");
        require(n_cl >= 0.0, "SqueezedBathParams: n_cl must be >= 0");
    }
};

/// n_dr = 4|f|^2 / (gamma^2 + 4 delta^2).
inline double intracavity_drive_photons(const CavityParams& p) {
    p.validate();
    const double f2 = p.drive_re * p.drive_re + p.drive_im * p.drive_im;
    return 4.0 * f2 / (p.gamma * p.gamma + 4.0 * p.delta * p.delta);
}

/// Symmetric step function, Θ(0) = 1/2.
inline double heaviside_sym(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return 0.0;
    return 0.5;
}

// ---------------------------------------------------------------------------
// Filter functions

enum class Shape { sine, cosine };

struct HarmonicComponent {
    Shape shape{Shape::cosine};
    double frequency{0.0};
    double weight{1.0};
};

// F(t) = lambda * sum_k weight_k * shape_k(frequency_k t) on [0, t_f].
struct FilterSpec {
    double lambda{0.0};
    std::vector<HarmonicComponent> components;
    double t_f{1.0};

    void validate() const {
        require(std::isfinite(lambda), "FilterSpec: lambda must be finite");
        require(std::isfinite(t_f) && t_f > 0.0, "FilterSpec: t_f must be > 0");
        for (const auto& c : components) {
            require(std::isfinite(c.frequency) && c.frequency >= 0.0,
                    "FilterSpec: component frequency must be finite and >= 0");
            require(std::isfinite(c.weight), "FilterSpec: component weight must be finite");
        }
    }

    // Unit-strength shape F(t)/lambda; no range check.
    double shape_at(double t) const {
        double s = 0.0;
        for (const auto& c : components) {
            const double arg = c.frequency * t;
            s += c.weight * (c.shape == Shape::sine ? std::sin(arg) : std::cos(arg));
        }
        return s;
    }

    FilterSpec with_lambda(double l) const {
        FilterSpec out = *this;
        out.lambda = l;
        return out;
    }

    static FilterSpec constant(double lambda, double t_f) {
        return FilterSpec{lambda, {{Shape::cosine, 0.0, 1.0}}, t_f};
    }

    // lambda (sin 2wt + cos wt): isolates Im S[w, w] at third order.
    static FilterSpec two_tone(double lambda, double omega, double t_f) {
        return FilterSpec{lambda, {{Shape::sine, 2.0 * omega, 1.0}, {Shape::cosine, omega, 1.0}}, t_f};
    }
};

inline double eval_filter(const FilterSpec& fs, double t) {
    fs.validate();
    require(t >= 0.0 && t <= fs.t_f, "eval_filter: t outside [0, t_f]");
    return fs.lambda * fs.shape_at(t);
}

// ---------------------------------------------------------------------------
// Frequency grids and surfaces

struct FreqGrid2D {
    std::vector<double> omega1_values;
    std::vector<double> omega2_values;

    void validate() const {
        auto check = [](const std::vector<double>& v, const char* name) {
            require(!v.empty(), std::string("FreqGrid2D: ") + name + " is empty");
            for (std::size_t i = 0; i < v.size(); ++i) {
                require(std::isfinite(v[i]), std::string("FreqGrid2D: ") + name + " not finite");
                if (i > 0)
                    require(v[i] > v[i - 1], std::string("FreqGrid2D: ") + name + " not strictly ascending");
            }
        };
        check(omega1_values, "omega1_values");
        check(omega2_values, "omega2_values");
    }

    std::size_t rows() const { return omega1_values.size(); }
    std::size_t cols() const { return omega2_values.size(); }

    static std::vector<double> linspace(double lo, double hi, std::size_t count) {
        require(count >= 1, "linspace: count must be >= 1");
        require(count == 1 || hi > lo, "linspace: need hi > lo when count > 1");
        std::vector<double> v(count);
        if (count == 1) {
            v[0] = lo;
            return v;
        }
        // Endpoint weighting keeps symmetric grids exactly symmetric (0 lands on 0).
        const auto m = static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) {
            const auto k = static_cast<double>(i);
            v[i] = (lo * (m - k) + hi * k) / m;
        }
        return v;
    }

    static FreqGrid2D square(double lo, double hi, std::size_t count) {
        auto v = linspace(lo, hi, count);
        return FreqGrid2D{v, v};
    }

    static FreqGrid2D single(double w1, double w2) { return FreqGrid2D{{w1}, {w2}}; }
};

// "min:max:count", endpoints inclusive.
inline FreqGrid2D parse_grid(std::string_view text) {
    const auto a = text.find(':');
    const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
    require(a != std::string_view::npos && b != std::string_view::npos,
            "grid must have the form min:max:count");
    const std::string s(text);
    double lo = 0.0, hi = 0.0;
    long count = 0;
    try {
        std::size_t used = 0;
        lo = std::stod(s.substr(0, a), &used);
        require(used == a, "bad grid min");
        hi = std::stod(s.substr(a + 1, b - a - 1), &used);
        require(used == b - a - 1, "bad grid max");
        count = std::stol(s.substr(b + 1), &used);
        require(used == s.size() - b - 1, "bad grid count");
    } catch (const std::logic_error&) {
        throw std::invalid_argument("grid must have the form min:max:count");
    }
    require(count >= 1, "grid count must be >= 1");
    return FreqGrid2D::square(lo, hi, static_cast<std::size_t>(count));
}

enum class Source { analytic_thermal, analytic_drive, analytic_total, lindblad, langevin };

inline std::string_view to_string(Source s) {
    switch (s) {
    case Source::analytic_thermal: return "analytic-thermal";
    case Source::analytic_drive: return "analytic-drive";
    case Source::analytic_total: return "analytic-total";
    case Source::lindblad: return "lindblad";
    case Source::langevin: return "langevin";
    }
    return "unknown";
}

inline Source parse_source(std::string_view s) {
    for (Source v : {Source::analytic_thermal, Source::analytic_drive, Source::analytic_total,
                     Source::lindblad, Source::langevin})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown source '" + std::string(s) + "'");
}

// Row index = omega1, column index = omega2.
struct BispectrumSurface {
    FreqGrid2D grid;
    Eigen::MatrixXcd values;
    Source source{Source::analytic_total};
    CavityParams params;
    // Numerical sources: quadrature error estimate (lindblad) or per-entry
    // standard errors of (Re, Im) packed as a complex number (langevin).
    double error_bound{0.0};
    Eigen::MatrixXcd std_error;

    bool consistent() const {
        return values.rows() == static_cast<Eigen::Index>(grid.rows()) &&
               values.cols() == static_cast<Eigen::Index>(grid.cols());
    }

    bool finite() const { return values.allFinite(); }
};

} // namespace qbs
