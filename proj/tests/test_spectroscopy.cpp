// test_spectroscopy.cpp — Im S from the third-order phase drift of a weakly coupled probe

#include <cmath>

#include <gtest/gtest.h>

#include "qbs/analytic.hpp"
#include "qbs/spectroscopy.hpp"

using namespace qbs;

namespace {

const CavityParams k_detuned = CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0);
const std::vector<double> k_lambdas = {0.05, 0.1, 0.2, 0.3};

} // namespace

TEST(ImBispectrum, MatchesClosedForm) {
    const double w = 3.0;
    const auto e = estimate_im_bispectrum(k_detuned, w, k_lambdas, default_duration(w), IntegratorConfig{});
    const double an = s_total(k_detuned, {w, w}).imag();
    EXPECT_NEAR(e.estimate / an, 1.0, 0.1);
    EXPECT_LT(e.condition, 1e6);
    EXPECT_EQ(e.rates.size(), k_lambdas.size());
}

TEST(ImBispectrum, NoiselessCavityGivesZero) {
    const auto e = estimate_im_bispectrum({1.0, 0.0, 0.0, 0.0, 0.0}, 3.0, k_lambdas, default_duration(3.0),
                                          IntegratorConfig{});
    EXPECT_LE(std::abs(e.estimate), std::max(3.0 * e.stderr_, 1e-12));
}

TEST(ImBispectrum, StationaryInDuration) {
    const double w = 3.0, t_f = default_duration(w);
    const auto a = estimate_im_bispectrum(k_detuned, w, k_lambdas, t_f, IntegratorConfig{});
    const auto b = estimate_im_bispectrum(k_detuned, w, k_lambdas, 2.0 * t_f, IntegratorConfig{});
    EXPECT_LE(std::abs(a.estimate - b.estimate), std::max(a.stderr_, b.stderr_));
}

TEST(ImBispectrum, RejectsBadCouplingSets) {
    const double t_f = default_duration(3.0);
    EXPECT_THROW(estimate_im_bispectrum(k_detuned, 3.0, {0.1, 0.2}, t_f, {}), std::invalid_argument);
    EXPECT_THROW(estimate_im_bispectrum(k_detuned, 3.0, {0.1, 0.3, 0.2}, t_f, {}), std::invalid_argument);
    EXPECT_THROW(estimate_im_bispectrum(k_detuned, 3.0, {0.0, 0.1, 0.2}, t_f, {}), std::invalid_argument);
    // nearly collinear λ³ and λ⁵ columns
    EXPECT_THROW(estimate_im_bispectrum(k_detuned, 3.0, {0.1, 0.1000001, 0.1000002}, t_f, {}), std::invalid_argument);
}

TEST(Scaling, CubicAtWeakCoupling) {
    const auto s = scaling_exponent(k_detuned, 3.0, {0.03, 0.05, 0.1, 0.15, 0.2, 0.3}, default_duration(3.0), {});
    ASSERT_TRUE(s.resolved);
    EXPECT_NEAR(s.exponent, 3.0, 0.1);
}

TEST(Scaling, GaussianSurrogateUnresolved) {
    const auto s =
        scaling_exponent({1.0, 0.0, 0.0, 0.0, 0.0}, 3.0, {0.03, 0.05, 0.1, 0.15, 0.2, 0.3}, default_duration(3.0), {});
    EXPECT_FALSE(s.resolved);
    EXPECT_TRUE(std::isnan(s.exponent));
}

TEST(Scaling, DriftsAtStrongCoupling) {
    const auto s = scaling_exponent(k_detuned, 3.0, {0.3, 0.5, 0.8, 1.2, 2.0, 3.0}, default_duration(3.0), {});
    ASSERT_TRUE(s.resolved);
    EXPECT_GT(std::abs(s.exponent - 3.0), 0.3);
}

TEST(Spectroscopy, PhaseRateConvention) {
    EXPECT_DOUBLE_EQ(predicted_phase_rate(0.5, 2.0), 0.125 * 2.0 / 8.0);
    EXPECT_TRUE(is_period_multiple(default_duration(3.0), 2.0 * M_PI / 3.0));
}
