// test_model.cpp — parameters, filters, grids and the step-function convention

#include <cmath>

#include <gtest/gtest.h>

#include "qbs/model.hpp"

using namespace qbs;

TEST(CavityParams, DrivePhotonNumber) {
    EXPECT_DOUBLE_EQ(intracavity_drive_photons({1.0, 0.0, 0.5, 0.0, 0.0}), 1.0);
    EXPECT_DOUBLE_EQ(intracavity_drive_photons({1.0, 3.7, 0.0, 0.0, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(intracavity_drive_photons({1.0, 0.5, 0.5, 0.0, 0.0}), 0.5);
    // complex drive enters through |f|²
    EXPECT_DOUBLE_EQ(intracavity_drive_photons({1.0, 0.0, 0.3, 0.4, 0.0}), 1.0);
}

TEST(CavityParams, FromDrivePhotonsRoundTrips) {
    for (double d : {0.0, 0.4, -2.0, 10.0}) {
        const auto p = CavityParams::from_drive_photons(1.3, d, 0.7, 0.2);
        EXPECT_NEAR(intracavity_drive_photons(p), 0.7, 1e-14);
    }
}

TEST(CavityParams, Validation) {
    EXPECT_THROW((CavityParams{0.0, 0.0, 0.0, 0.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((CavityParams{1.0, 0.0, 0.0, 0.0, -0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((CavityParams{1.0, NAN, 0.0, 0.0, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((SqueezedBathParams{1.0, 0.0, INFINITY, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((SqueezedBathParams{1.0, 0.0, 0.0, -1.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((SqueezedBathParams{1.0, 2.0, -0.5, 0.0}.validate()));
}

TEST(Filter, Evaluation) {
    EXPECT_DOUBLE_EQ(eval_filter(FilterSpec::two_tone(1.0, 1.0, 10.0), 0.0), 1.0);
    for (double t : {0.0, 0.3, 4.0}) EXPECT_DOUBLE_EQ(eval_filter(FilterSpec::constant(2.0, 5.0), t), 2.0);
    EXPECT_NEAR(eval_filter(FilterSpec::two_tone(0.1, 2.0, 10.0), M_PI / 4.0), 0.0, 1e-16);
}

TEST(Filter, RangeAndValidation) {
    const auto fs = FilterSpec::two_tone(1.0, 1.0, 2.0);
    EXPECT_THROW(eval_filter(fs, -0.1), std::invalid_argument);
    EXPECT_THROW(eval_filter(fs, 2.1), std::invalid_argument);
    EXPECT_THROW(eval_filter(FilterSpec::constant(1.0, 0.0), 0.0), std::invalid_argument);
}

TEST(Heaviside, SymmetricAtZero) {
    EXPECT_EQ(heaviside_sym(3.2), 1.0);
    EXPECT_EQ(heaviside_sym(-0.1), 0.0);
    EXPECT_EQ(heaviside_sym(0.0), 0.5);
}

TEST(Grid, ParseInclusive) {
    const auto g = parse_grid("-15:15:101");
    ASSERT_EQ(g.rows(), 101u);
    ASSERT_EQ(g.cols(), 101u);
    EXPECT_DOUBLE_EQ(g.omega1_values.front(), -15.0);
    EXPECT_DOUBLE_EQ(g.omega1_values.back(), 15.0);
    EXPECT_DOUBLE_EQ(g.omega1_values[50], 0.0);
    EXPECT_EQ(parse_grid("0.5:0.5:1").rows(), 1u);
}

TEST(Grid, RejectsMalformed) {
    for (const char* bad : {"", "1:2", "1:2:x", "a:2:3", "2:1:3", "1:2:0", "1:2:3:4"})
        EXPECT_THROW(parse_grid(bad), std::invalid_argument) << bad;
    EXPECT_THROW((FreqGrid2D{{0.0, 0.0}, {1.0}}.validate()), std::invalid_argument);
    EXPECT_THROW((FreqGrid2D{{}, {1.0}}.validate()), std::invalid_argument);
}

TEST(Source, NamesRoundTrip) {
    for (auto s : {Source::analytic_thermal, Source::analytic_drive, Source::analytic_total, Source::lindblad,
                   Source::langevin})
        EXPECT_EQ(parse_source(to_string(s)), s);
    EXPECT_THROW(parse_source("magic"), std::invalid_argument);
}
