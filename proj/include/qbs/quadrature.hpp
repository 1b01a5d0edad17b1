// quadrature.hpp — 2D Fourier quadrature of lag-domain cumulants with Richardson refinement

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"
#include "qbs/model.hpp"

namespace qbs {

struct FourierQuadrature {
    Eigen::MatrixXcd values;      // Richardson-extrapolated transform
    Eigen::MatrixXd error;        // |extrapolated − finest trapezoid|
    int points_per_axis{0};
    bool converged{false};
};

namespace detail {

inline Eigen::MatrixXcd trapezoid_fourier_2d(const std::function<double(double, double)>& f, double T, int K,
                                             const FreqGrid2D& grid) {
    const double h = 2.0 * T / (K - 1);
    std::vector<double> tau(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) tau[static_cast<std::size_t>(i)] = -T + h * i;
    Eigen::MatrixXd C(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) C(i, j) = f(tau[static_cast<std::size_t>(i)], tau[static_cast<std::size_t>(j)]);
    auto rows = [&](const std::vector<double>& om) {
        Eigen::MatrixXcd E(static_cast<Eigen::Index>(om.size()), K);
        for (std::size_t a = 0; a < om.size(); ++a)
            for (int k = 0; k < K; ++k) {
                const double w = (k == 0 || k == K - 1) ? 0.5 * h : h;
                E(static_cast<Eigen::Index>(a), k) = w * std::exp(cplx(0.0, -om[a] * tau[static_cast<std::size_t>(k)]));
            }
        return E;
    };
    const Eigen::MatrixXcd E1 = rows(grid.omega1_values), E2 = rows(grid.omega2_values);
    return E1 * C.cast<cplx>() * E2.transpose();
}

} // namespace detail

// ∫∫_{[−T,T]²} e^{−i(ω1τ1 + ω2τ2)} f(τ1, τ2). Halves the step until the
// Richardson correction falls below rel_tol of the value (or max_points).
inline FourierQuadrature fourier_transform_2d(const std::function<double(double, double)>& f, double T,
                                              const FreqGrid2D& grid, double rel_tol = 1e-6, int start_points = 201,
                                              int max_points = 3201) {
    grid.validate();
    require(T > 0.0, "window must be > 0");
    require(start_points >= 5 && start_points % 2 == 1, "start_points must be odd and >= 5");
    FourierQuadrature out;
    int K = start_points;
    Eigen::MatrixXcd coarse = detail::trapezoid_fourier_2d(f, T, K, grid);
    for (;;) {
        const int Kf = 2 * K - 1;
        const Eigen::MatrixXcd fine = detail::trapezoid_fourier_2d(f, T, Kf, grid);
        const Eigen::MatrixXcd extrap = fine + (fine - coarse) / 3.0;
        out.values = extrap;
        out.error = (extrap - fine).cwiseAbs();
        out.points_per_axis = Kf;
        bool ok = true;
        for (Eigen::Index i = 0; i < extrap.rows(); ++i)
            for (Eigen::Index j = 0; j < extrap.cols(); ++j)
                if (out.error(i, j) > rel_tol * std::max(std::abs(extrap(i, j)), 1e-300)) ok = false;
        out.converged = ok;
        if (ok || 2 * Kf - 1 > max_points) return out;
        coarse = fine;
        K = Kf;
    }
}

} // namespace qbs
