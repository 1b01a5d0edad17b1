// test_lindblad.cpp — master-equation oracle: steady states, regression chains, Keldysh combination

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qbs/analytic.hpp"
#include "qbs/lindblad.hpp"

using namespace qbs;

namespace {

const FockWorkspace& thermal_ws() {
    static const FockWorkspace ws = build_workspace(CavityParams{1.0, 0.0, 0.0, 0.0, 1.0}, 40);
    return ws;
}

const FockWorkspace& detuned_ws() {
    static const FockWorkspace ws = build_workspace_auto(CavityParams::from_drive_photons(1.0, 5.0, 1.0, 0.0));
    return ws;
}

} // namespace

TEST(Workspace, ThermalSteadyState) {
    const auto& ws = thermal_ws();
    EXPECT_NEAR(ws.mean_n, 1.0, 1e-6);
    for (int k = 0; k + 1 < 20; ++k)
        EXPECT_NEAR(ws.steady_state(k + 1, k + 1).real() / ws.steady_state(k, k).real(), 0.5, 1e-6);
    EXPECT_NEAR(ws.steady_state.trace().real(), 1.0, 1e-10);
    EXPECT_LT((ws.steady_state - ws.steady_state.adjoint()).norm(), 1e-12);
}

TEST(Workspace, DrivenMeanPhotons) {
    for (double n_th : {0.0, 0.5}) {
        const auto p = CavityParams::from_drive_photons(1.0, 1.0, 0.5, n_th);
        const auto ws = build_workspace_auto(p, 25);
        EXPECT_NEAR(ws.mean_n, n_th + 0.5, 1e-6);
        EXPECT_LT(ws.top_population, 1e-8);
    }
}

TEST(Workspace, UnsqueezedBathIsThermal) {
    const auto a = build_workspace(SqueezedBathParams{1.0, 0.4, 0.0, 0.6}, 30);
    const auto b = build_workspace(CavityParams{1.0, 0.4, 0.0, 0.0, 0.6}, 30);
    EXPECT_LT((a.steady_state - b.steady_state).norm(), 1e-9);
    EXPECT_NEAR(keldysh_c3(a, 0.4, -0.7), keldysh_c3(b, 0.4, -0.7), 1e-9);
}

TEST(Workspace, TruncationDetected) {
    const auto p = CavityParams::from_drive_photons(1.0, 0.0, 5.0, 0.0);
    try {
        build_workspace(p, 8);
        FAIL() << "expected TruncationError";
    } catch (const TruncationError& e) {
        EXPECT_GT(e.suggested_dim(), 8);
    }
    EXPECT_GE(build_workspace_auto(p, 8).dim, 12);
    EXPECT_THROW(build_workspace(p, 3), std::invalid_argument);
}

TEST(Propagate, IdentityFixedPointAndTrace) {
    const auto ws = build_workspace_auto(CavityParams::from_drive_photons(1.0, 1.0, 0.5, 0.2), 20);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    Eigen::MatrixXcd M(ws.dim, ws.dim);
    for (int i = 0; i < ws.dim; ++i)
        for (int j = 0; j < ws.dim; ++j) M(i, j) = cplx(N(rng), N(rng));
    M = 0.5 * (M + M.adjoint()).eval();
    EXPECT_EQ(propagate(ws, M, 0.0), M);
    EXPECT_LT((propagate(ws, ws.steady_state, 2.3) - ws.steady_state).norm(), 1e-9);
    EXPECT_NEAR(std::abs(propagate(ws, M, 0.7).trace() - M.trace()), 0.0, 1e-10 * M.norm());
}

TEST(Propagate, KrylovAgreesWithDense) {
    auto ws = build_workspace(CavityParams::from_drive_photons(1.0, 2.0, 0.3, 0.1), 14);
    Eigen::MatrixXcd M = ws.steady_state * ws.dn;
    ws.method = PropagationMethod::krylov;
    const auto a = propagate(ws, M, 1.3);
    ws.method = PropagationMethod::dense;
    const auto b = propagate(ws, M, 1.3);
    EXPECT_LT((a - b).norm(), 1e-10);
}

TEST(ThreePoint, CoincidentAndVacuum) {
    const auto& ws = thermal_ws();
    const cplx v = three_point(ws, Placement::chrono, 0.0, 0.0, 0.0);
    EXPECT_NEAR(std::abs(v - coincident_third_moment(ws)), 0.0, 1e-10);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
    const auto vac = build_workspace(CavityParams{1.0, 0.5, 0.0, 0.0, 0.0}, 6);
    EXPECT_NEAR(std::abs(three_point(vac, Placement::mixed, 0.0, 0.4, 1.0)), 0.0, 1e-14);
    EXPECT_THROW(three_point(ws, Placement::chrono, 1.0, 0.0, 2.0), std::invalid_argument);
}

TEST(Keldysh, EarliestInMiddleStringsAreExcluded) {
    int calls = 0;
    auto g = [&](Placement, double, double, double) {
        ++calls;
        return cplx(1.0);
    };
    EXPECT_FALSE(string_correlator(g, 1.0, 0.0, 2.0).has_value());
    EXPECT_TRUE(string_correlator(g, 0.0, 1.0, 2.0).has_value());
    EXPECT_TRUE(string_correlator(g, 2.0, 1.0, 0.0).has_value());
    EXPECT_EQ(calls, 2);
    // the kernel never asks for the excluded strings
    EXPECT_NO_THROW(keldysh_combine(g, 0.3, -1.0, 2.0, 0.0));
}

TEST(Keldysh, ThermalCumulant) {
    const auto& ws = thermal_ws();
    const CavityParams p{1.0, 0.0, 0.0, 0.0, 1.0};
    for (double t : {0.3, 1.0, 2.5}) EXPECT_NEAR(keldysh_c3(ws, t, t), 6.0 * std::exp(-t), 1e-4);
    for (auto [a, b] : {std::pair{0.5, -0.8}, std::pair{-1.1, -0.2}, std::pair{1.4, 0.6}})
        EXPECT_NEAR(keldysh_c3(ws, a, b) / c_thermal_3(p, 0.0, a, b), 1.0, 1e-6);
}

TEST(Keldysh, DrivenCumulantMatchesWickForm) {
    const auto p = CavityParams::from_drive_photons(1.0, 1.0, 0.5, 0.5);
    const auto ws = build_workspace_auto(p, 25);
    for (auto [a, b] : {std::pair{0.5, -0.8}, std::pair{-1.1, -0.2}, std::pair{1.4, 0.6}, std::pair{0.7, 0.7},
                        std::pair{-0.9, -0.9}}) {
        const double an = c_thermal_3(p, 0.0, a, b) +
                          (a == b ? c_drive_equal_time(p, a) : c_drive_3(p, 0.0, a, b));
        EXPECT_NEAR(keldysh_c3(ws, a, b) / an, 1.0, 1e-5) << a << "," << b;
    }
}

TEST(Keldysh, EqualTimeDecomposition) {
    const auto& ws = detuned_ws();
    for (double t : {0.3, 1.1, 2.4}) {
        EXPECT_NEAR(keldysh_c3(ws, t, t) / skewness_decomposition(ws, t), 1.0, 1e-6);
        EXPECT_NEAR(keldysh_c3(ws, -t, -t) / skewness_decomposition(ws, -t), 1.0, 1e-6);
        EXPECT_TRUE(std::isnan(skewness_terms(ws, t).double_commutator));
        EXPECT_GT(std::abs(keldysh_c3(ws, t, t) - keldysh_c3(ws, -t, -t)), 1e-3);
    }
}

TEST(Keldysh, TwoPointThermal) {
    const auto& ws = thermal_ws();
    for (double t : {0.0, 0.5, -1.5, 3.0}) EXPECT_NEAR(keldysh_c2(ws, t), 2.0 * std::exp(-std::abs(t)), 1e-6);
    EXPECT_NEAR(keldysh_c2(ws, 0.0), (ws.dn * ws.dn * ws.steady_state).trace().real(), 1e-12);
}

TEST(Keldysh, TwoPointSpectrum) {
    // ∫ e^{−iωτ} C2(τ) dτ = 2γ n(n+1)/(γ² + ω²)
    const CavityParams p{1.0, 0.0, 0.0, 0.0, 0.3};
    const auto ws = build_workspace(p, 24);
    const double h = 0.02, T = 30.0;
    const int K = static_cast<int>(std::lround(T / h));
    std::vector<double> c(static_cast<std::size_t>(K + 1));
    Eigen::MatrixXcd x = ws.steady_state * ws.dn;
    for (int k = 0; k <= K; ++k) {
        c[static_cast<std::size_t>(k)] = (ws.dn * x).trace().real();
        x = propagate(ws, x, h);
    }
    for (double w : {0.0, 0.7, 2.0}) {
        double s = 0.5 * c[0];
        for (int k = 1; k <= K; ++k) s += std::cos(w * k * h) * c[static_cast<std::size_t>(k)];
        s *= 2.0 * h; // even in τ: twice the half-line trapezoid
        const double an = 2.0 * 0.3 * 1.3 / (1.0 + w * w);
        EXPECT_NEAR(s / an, 1.0, 1e-3) << w;
    }
}

TEST(Oracle, ThermalBispectrum) {
    const CavityParams p{1.0, 0.0, 0.0, 0.0, 1.0};
    const auto ws = build_workspace(p, 30);
    const FreqGrid2D grid{{-1.0, 0.0, 0.8}, {-0.5, 0.6}};
    const auto o = oracle_bispectrum(ws, grid, 30.0, 241);
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const double an = s_thermal(p, {grid.omega1_values[i], grid.omega2_values[j]});
            const cplx v = o.surface.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            EXPECT_LT(std::abs(v - an) / an, 0.02);
        }
    EXPECT_FALSE(o.tail_flagged);
}

TEST(Oracle, DrivenImaginaryPartVanishesOnAxis) {
    const auto p = CavityParams::from_drive_photons(1.0, 1.0, 0.5, 0.0);
    const auto ws = build_workspace_auto(p, 25);
    const FreqGrid2D grid{{-0.6, 0.0, 0.9}, {-0.8, 0.0, 0.5}};
    const auto o = oracle_bispectrum(ws, grid, 20.0, 161);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const cplx row = o.surface.values(1, j), col = o.surface.values(j, 1);
        EXPECT_LE(std::abs(row.imag()), 3.0 * o.quadrature_error(1, j) + 1e-3 * std::abs(row));
        EXPECT_LE(std::abs(col.imag()), 3.0 * o.quadrature_error(j, 1) + 1e-3 * std::abs(col));
    }
    // off the axes the quantum part gives a genuinely complex value
    EXPECT_GT(std::abs(o.surface.values(2, 2).imag()), 1e-2);
}

TEST(Oracle, RejectsBadQuadrature) {
    const auto& ws = thermal_ws();
    EXPECT_THROW(oracle_bispectrum(ws, FreqGrid2D::single(0.0, 0.0), 10.0, 100), std::invalid_argument);
    EXPECT_THROW(oracle_bispectrum(ws, FreqGrid2D::single(0.0, 0.0), -1.0, 101), std::invalid_argument);
}

TEST(Commutators, LinearVersusNumber) {
    const auto rep = linear_commutator_check(30, {{0.3, 1.7}, {0.0, 0.9}, {1.0, 1.0}});
    EXPECT_LT(rep.linear_max_residue, 1e-10);
    EXPECT_GT(rep.number_min_residue, 1e-2);
    EXPECT_LT(rep.linear_equal_time, 1e-12);
    EXPECT_LT(rep.number_equal_time, 1e-12);
}
