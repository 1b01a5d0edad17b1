// test_phase_space.cpp — Gaussian phase-space evolution of the qubit coherence

#include <cmath>

#include <gtest/gtest.h>

#include "qbs/analytic.hpp"
#include "qbs/phase_space.hpp"
#include "qbs/spectroscopy.hpp"

using namespace qbs;

TEST(SteadyInit, FixedPoints) {
    const auto s0 = steady_init({1.0, 0.7, 0.0, 0.0, 2.0});
    EXPECT_EQ(s0.x_bar, cplx(0.0));
    EXPECT_EQ(s0.p_bar, cplx(0.0));
    EXPECT_EQ(s0.sigma_s, cplx(2.5));
    EXPECT_EQ(steady_init({1.0, 0.0, 0.0, 0.0, 0.0}).sigma_s, cplx(0.5));

    const auto s = steady_init({1.0, 0.0, 0.5, 0.0, 0.0});
    EXPECT_NEAR(std::abs(s.x_bar), 0.0, 1e-15);
    EXPECT_NEAR(s.p_bar.real(), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(0.5 * std::norm(s.x_bar) + 0.5 * std::norm(s.p_bar), 1.0, 1e-14);
}

TEST(SteadyInit, MeanPhotonsMatchDrive) {
    const auto p = CavityParams::from_drive_photons(1.0, -2.3, 0.8, 0.0);
    const auto s = steady_init(p);
    EXPECT_NEAR(0.5 * (std::norm(s.x_bar) + std::norm(s.p_bar)), 0.8, 1e-13);
}

TEST(Chi, ZeroCouplingIsExactlyZero) {
    const auto p = CavityParams::from_drive_photons(1.0, 1.0, 1.0, 0.5);
    EXPECT_EQ(integrate_chi(p, FilterSpec::two_tone(0.0, 1.0, 20.0), IntegratorConfig{}), cplx(0.0));
    const auto st = integrate_states(p, FilterSpec::constant(0.0, 5.0), IntegratorConfig{}, {1.0, 5.0});
    EXPECT_EQ(st.back().sigma_s, cplx(1.0));
}

TEST(Chi, SecondOrderMatchesThermalCorrelator) {
    // −Re χ ≈ (λ²/2) ∬ C2(t − t') over [0, t_f]², C2 = n(n+1) e^{−γ|τ|}
    const CavityParams p{1.0, 0.3, 0.0, 0.0, 1.0};
    const double t_f = 10.0, lambda = 1e-3;
    const cplx chi = integrate_chi(p, FilterSpec::constant(lambda, t_f), IntegratorConfig{});
    const double g = p.gamma;
    const double dbl = 2.0 * (t_f / g - (1.0 - std::exp(-g * t_f)) / (g * g));
    const double pred = 0.5 * lambda * lambda * p.n_th * (p.n_th + 1.0) * dbl;
    EXPECT_NEAR(-chi.real() / pred, 1.0, 1e-3);
    // first order: −iλ<n> t_f
    EXPECT_NEAR(chi.imag() / (-lambda * p.n_th * t_f), 1.0, 1e-3);
}

TEST(FrequencyShift, ZeroCoupling) {
    const auto p = CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0);
    const double w = 3.0, t_f = default_duration(w);
    const auto s = frequency_shift(p, FilterSpec::two_tone(0.0, w, t_f), IntegratorConfig{},
                                   second_half_checkpoints(t_f, 2.0 * M_PI / w));
    EXPECT_EQ(s.slope, 0.0);
    EXPECT_FALSE(s.flagged);
}

TEST(FrequencyShift, OddOrdersCancelUnderSignFlip) {
    const auto p = CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0);
    const double w = 3.0, t_f = default_duration(w);
    const auto times = second_half_checkpoints(t_f, 2.0 * M_PI / w);
    const auto a = frequency_shift(p, FilterSpec::two_tone(0.3, w, t_f), IntegratorConfig{}, times);
    const auto b = frequency_shift(p, FilterSpec::two_tone(-0.3, w, t_f), IntegratorConfig{}, times);
    EXPECT_NEAR(0.5 * (a.slope + b.slope), 0.0, 1e-6 * std::abs(a.slope));
}

TEST(FrequencyShift, ModerateCouplingTracksBispectrum) {
    const auto p = CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0);
    const double w = 3.0, t_f = default_duration(w);
    const auto s = frequency_shift(p, FilterSpec::two_tone(0.3, w, t_f), IntegratorConfig{},
                                   second_half_checkpoints(t_f, 2.0 * M_PI / w));
    const double pred = predicted_phase_rate(0.3, s_total(p, {w, w}).imag());
    EXPECT_NEAR(s.slope / pred, 1.0, 0.25);
    EXPECT_FALSE(s.flagged);
}

TEST(FrequencyShift, RejectsMisalignedDurations) {
    const auto p = CavityParams::from_drive_photons(1.0, 1.0, 1.0, 0.0);
    const auto fs = FilterSpec::two_tone(0.1, 1.0, 100.0);
    EXPECT_THROW(frequency_shift(p, fs, IntegratorConfig{}, {50.0, 100.0}), std::invalid_argument);
    EXPECT_EQ(fundamental_period(fs), 2.0 * M_PI);
    EXPECT_TRUE(is_period_multiple(period_aligned(100.0, 2.0 * M_PI), 2.0 * M_PI));
}
