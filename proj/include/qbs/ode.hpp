// ode.hpp — Adaptive Dormand–Prince 5(4) integrator for complex state vectors

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"

namespace qbs {

struct OdeTolerances {
    double rel_tol{1e-10};
    double abs_tol{1e-12};
    double max_step{0.1};
    double initial_step{1e-3};
    double min_step{1e-14};
    long max_steps{50'000'000};
};

struct OdeStats {
    long accepted{0};
    long rejected{0};
};

// Integrates y' = rhs(t, y) from t0 and returns the state at each checkpoint
// (ascending, all >= t0). Steps land exactly on checkpoints.
template <class Rhs>
std::vector<Eigen::VectorXcd> integrate_dopri5(Rhs&& rhs, double t0, Eigen::VectorXcd y,
                                               const std::vector<double>& checkpoints, const OdeTolerances& tol,
                                               OdeStats* stats = nullptr) {
    require(tol.rel_tol > 0.0 && tol.abs_tol > 0.0 && tol.max_step > 0.0, "ODE tolerances must be > 0");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        require(std::isfinite(checkpoints[i]) && checkpoints[i] >= t0, "ODE checkpoints must be finite and >= t0");
        if (i > 0) require(checkpoints[i] >= checkpoints[i - 1], "ODE checkpoints must be ascending");
    }

    // Butcher tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const Eigen::Index n = y.size();
    std::vector<Eigen::VectorXcd> out;
    out.reserve(checkpoints.size());

    auto snapshot = [](const Eigen::VectorXcd& s) {
        return std::vector<std::complex<double>>(s.data(), s.data() + s.size());
    };

    double t = t0;
    double h = std::min(tol.initial_step, tol.max_step);
    Eigen::VectorXcd k1 = rhs(t, y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), err(n);
    long steps = 0;
    OdeStats local;

    for (double target : checkpoints) {
        while (t < target) {
            if (++steps > tol.max_steps)
                throw IntegrationError("ODE: step budget exhausted", t, snapshot(y));
            bool last = false;
            double hh = std::min(h, tol.max_step);
            if (t + hh >= target) {
                hh = target - t;
                last = true;
            }
            k2 = rhs(t + c2 * hh, y + hh * (a21 * k1));
            k3 = rhs(t + c3 * hh, y + hh * (a31 * k1 + a32 * k2));
            k4 = rhs(t + c4 * hh, y + hh * (a41 * k1 + a42 * k2 + a43 * k3));
            k5 = rhs(t + c5 * hh, y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            k6 = rhs(t + hh, y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            ynew = y + hh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = rhs(t + hh, ynew);
            err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            // RMS over the real and imaginary parts separately.
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double sre = tol.abs_tol + tol.rel_tol * std::max(std::abs(y[i].real()), std::abs(ynew[i].real()));
                const double sim = tol.abs_tol + tol.rel_tol * std::max(std::abs(y[i].imag()), std::abs(ynew[i].imag()));
                acc += std::pow(err[i].real() / sre, 2) + std::pow(err[i].imag() / sim, 2);
            }
            const double enorm = std::sqrt(acc / static_cast<double>(2 * n));

            if (!std::isfinite(enorm) || !ynew.allFinite()) {
                if (hh <= tol.min_step)
                    throw IntegrationError("ODE: non-finite state", t, snapshot(y));
                h = hh * 0.2;
                ++local.rejected;
                continue;
            }
            if (enorm <= 1.0) {
                t = last ? target : t + hh;
                y = ynew;
                k1 = k7; // first-same-as-last
                ++local.accepted;
                const double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
                // A short final step onto a checkpoint should not shrink the next one.
                h = last ? std::max(h, hh * fac) : hh * fac;
            } else {
                ++local.rejected;
                h = hh * std::max(0.2, 0.9 * std::pow(enorm, -0.2));
                if (h < tol.min_step * std::max(1.0, std::abs(t)))
                    throw IntegrationError("ODE: step size underflow", t, snapshot(y));
            }
        }
        out.push_back(y);
    }
    if (stats) *stats = local;
    return out;
}

} // namespace qbs
