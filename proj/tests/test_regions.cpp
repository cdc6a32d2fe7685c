#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "geonum/random.hpp"
#include "geonum/regions.hpp"

using namespace geonum;

namespace {

RealVector vec(std::initializer_list<double> xs) {
    RealVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST(UnitBall, ClosedFormsForSmallDimensions) {
    const double pi = std::numbers::pi;
    const double expected[] = {2, pi, 4 * pi / 3, pi * pi / 2, 8 * pi * pi / 15, pi * pi * pi / 6};
    for (int n = 1; n <= 6; ++n) EXPECT_NEAR(unit_ball_volume(n) / expected[n - 1], 1.0, 1e-12) << n;
}

TEST(BallOfVolume, Radius) {
    EXPECT_NEAR(Region::ball_of_volume(2, std::numbers::pi).radius(), 1.0, 1e-12);
    EXPECT_NEAR(Region::ball_of_volume(3, 4 * std::numbers::pi / 3).radius(), 1.0, 1e-12);
    EXPECT_NEAR(Region::ball_of_volume(3, 14.1371669).radius(), 1.5, 1e-6);
    EXPECT_EQ(Region::ball_of_volume(4, 7.5).volume(), 7.5);
    EXPECT_THROW(Region::ball_of_volume(3, 0.0), Error);
    try {
        Region::ball_of_volume(3, -1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidVolume);
    }
}

TEST(Box, VolumeAndBoundingRadius) {
    EXPECT_EQ(Region::box(vec({0, 0}), vec({1, 1})).volume(), 1.0);
    const Region cube = Region::box(vec({-1, -1, -1}), vec({1, 1, 1}));
    EXPECT_EQ(cube.volume(), 8.0);
    EXPECT_NEAR(cube.bounding_radius(), std::sqrt(3.0), 1e-15);
    EXPECT_EQ(Region::box(vec({0, 0, 0}), vec({5, 2, 1})).volume(), 10.0);
    try {
        Region::box(vec({0, 1}), vec({1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
    }
}

TEST(Indicator, ClosedBoundaries) {
    const Region ball = Region::ball_of_volume(3, 4 * std::numbers::pi / 3);
    EXPECT_EQ(indicator(ball, vec({1, 0, 0})), 1);
    EXPECT_EQ(indicator(ball, vec({1.001, 0, 0})), 0);
    const Region sq = Region::box(vec({0, 0}), vec({1, 1}));
    EXPECT_EQ(indicator(sq, vec({0.5, 0.5})), 1);
    EXPECT_EQ(indicator(sq, vec({1, 1})), 1);
    try {
        indicator(sq, vec({0.5, 0.5, 0.5}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Annulus, ShellMembership) {
    const Region a = Region::annulus(2, std::numbers::pi, 4 * std::numbers::pi);
    EXPECT_NEAR(a.volume(), 3 * std::numbers::pi, 1e-12);
    EXPECT_EQ(indicator(a, vec({0.5, 0})), 0);
    EXPECT_EQ(indicator(a, vec({1, 0})), 1);
    EXPECT_EQ(indicator(a, vec({2, 0})), 1);
    EXPECT_EQ(indicator(a, vec({2.01, 0})), 0);
}

TEST(ShiftedBall, Membership) {
    const Region a = Region::shifted_ball(vec({3, 0}), std::numbers::pi);
    EXPECT_EQ(indicator(a, vec({3.5, 0.5})), 1);
    EXPECT_EQ(indicator(a, vec({0, 0})), 0);
    EXPECT_NEAR(a.bounding_radius(), 4.0, 1e-12);
}

TEST(Composite, Volumes) {
    const Region u1 = Region::box(vec({0, 0}), vec({1, 1}));
    const Region u2 = Region::box(vec({2, 0}), vec({3, 1}));
    const Region both = Region::union_of({u1, u2}, 200000, 3);
    EXPECT_NEAR(both.volume(), 2.0, both.volume_error() + 1e-12);
    EXPECT_GT(both.volume_error(), 0);

    const Region cube = Region::box(vec({-1, -1, -1}), vec({1, 1, 1}));
    const Region none = Region::difference(cube, cube, 50000, 4);
    EXPECT_EQ(none.volume(), 0.0);

    const Region ball = Region::ball_of_volume(3, 5.0);
    const Region same = Region::union_of({ball, ball}, 200000, 5);
    EXPECT_NEAR(same.volume(), 5.0, same.volume_error() + 1e-12);
}

TEST(Composite, DeterministicForSeed) {
    const Region a = Region::ball_of_volume(2, 3.0);
    const Region b = Region::shifted_ball(vec({0.5, 0}), 3.0);
    EXPECT_EQ(Region::union_of({a, b}, 10000, 9).volume(), Region::union_of({a, b}, 10000, 9).volume());
}

TEST(Regions, IndicatorVanishesOutsideBoundingRadius) {
    Rng rng(21);
    const std::vector<Region> regions{
        Region::ball_of_volume(3, 7.0),
        Region::box(vec({-1, 0, -2}), vec({0.5, 1, 2})),
        Region::annulus(3, 1.0, 6.0),
        Region::shifted_ball(vec({1, -1, 0.5}), 2.0),
        Region::union_of({Region::ball_of_volume(3, 2.0), Region::shifted_ball(vec({2, 0, 0}), 1.0)}, 2000, 1),
        Region::difference(Region::ball_of_volume(3, 9.0), Region::ball_of_volume(3, 2.0), 2000, 2),
    };
    for (const Region& a : regions) {
        const double r = a.bounding_radius();
        for (int i = 0; i < 10000; ++i) {
            RealVector x = uniform_in_ball(3, 3 * r, rng);
            if (x.norm() > r * (1 + 1e-9)) {
                EXPECT_EQ(indicator(a, x), 0) << to_string(a.kind());
            }
        }
    }
}

TEST(Regions, MonteCarloRecoversBallVolume) {
    for (double t : {1.0, 5.0, 20.0}) {
        const Region ball = Region::ball_of_volume(3, t);
        const VolumeEstimate v = composite_volume(ball, 100000, 7);
        EXPECT_NEAR(v.volume, t, v.error + 1e-12) << t;
    }
}
