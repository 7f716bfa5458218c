#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace alexcurv;

namespace {

FunctionSpec saddle() { return FunctionSpec::quadratic(Eigen::Vector2d(2.0, -2.0).asDiagonal(), Point::Zero(2), 0.0); }

FunctionSpec lse2() {
    return FunctionSpec::log_sum_exp({{make_point({1, 0}), 0.0}, {make_point({0, 1}), 0.2}, {make_point({-1, -1}), 0.0}},
                                     0.5);
}

ConvexBody unit_disk() { return ConvexBody(2, {BallConstraint{make_point({0, 0}), 1.0}}, make_point({0, 0})); }

FunctionSpec disk_chart(double radius = 0.6) {
    return lower_boundary_function(unit_disk(), make_point({0, -1}), make_point({0, 0}), radius, 1e-10);
}

} // namespace

TEST(Evaluate, TrivialExamples) {
    EXPECT_EQ(evaluate(FunctionSpec::abs_coordinate(2, 0), make_point({0.5, 7})), 0.5);
    EXPECT_EQ(evaluate(FunctionSpec::half_squared_norm(2), make_point({3, 4})), 12.5);
    EXPECT_EQ(evaluate(FunctionSpec::norm_scaled(3, 1.0), Point::Zero(3)), 0.0);
}

TEST(Evaluate, DimensionMismatchIsADomainError) {
    EXPECT_THROW(evaluate(FunctionSpec::half_squared_norm(2), make_point({1, 2, 3})), DomainError);
    EXPECT_THROW(evaluate(FunctionSpec::half_squared_norm(2), make_point({1, std::nan("")})), DomainError);
}

TEST(Evaluate, LogSumExpIsStableForLargeArguments) {
    const auto f = FunctionSpec::log_sum_exp({{make_point({1}), 0.0}, {make_point({-1}), 0.0}}, 0.01);
    EXPECT_NEAR(evaluate(f, make_point({500.0})), 500.0, 1e-12);
    EXPECT_NEAR(evaluate(f, make_point({0.0})), 0.01 * std::log(2.0), 1e-15);
}

TEST(Subgradient, Examples) {
    EXPECT_EQ(subgradient(FunctionSpec::norm_scaled(1, 1.0), make_point({0}))[0], 0.0);
    EXPECT_TRUE(subgradient(FunctionSpec::half_squared_norm(2), make_point({3, 4})).isApprox(make_point({3, 4})));
    const auto f = FunctionSpec::max_affine({{make_point({1}), 0.0}, {make_point({2}), -1.0}});
    EXPECT_EQ(subgradient(f, make_point({2}))[0], 2.0);
}

TEST(Subgradient, MinimalNormAtKinks) {
    // |x1| on R^2 at the fold: hull of (1,0), (-1,0) has minimal element 0.
    EXPECT_LT(subgradient(FunctionSpec::abs_coordinate(2, 0), make_point({0, 0.3})).norm(), 1e-15);
    // max(x1, x2) at the diagonal: hull of e1, e2 has minimal element (1/2, 1/2).
    const auto f = FunctionSpec::max_affine({{make_point({1, 0}), 0.0}, {make_point({0, 1}), 0.0}});
    EXPECT_LT((subgradient(f, make_point({0.4, 0.4})) - make_point({0.5, 0.5})).norm(), 1e-12);
}

TEST(Subgradient, NonconvexIsUnsupported) {
    EXPECT_THROW(subgradient(saddle(), make_point({0.1, 0.1})), UnsupportedOperationError);
}

TEST(Subgradient, MatchesFiniteDifferencesAwayFromKinks) {
    const auto f = lse2();
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Point x = sample_in_region(rng, Region::ball(2, 1.0));
        EXPECT_LT((subgradient(f, x) - detail::finite_difference_gradient(f, x, 1e-6)).norm(), 1e-7);
    }
}

TEST(LipschitzEstimate, ExactFromPieceNormals) {
    EXPECT_DOUBLE_EQ(lipschitz_estimate(FunctionSpec::abs_coordinate(2, 0), Region::ball(2, 3.0), 64, 1), 1.0);
}

TEST(LipschitzEstimate, QuadraticOnBallOfRadiusTwo) {
    EXPECT_NEAR(lipschitz_estimate(FunctionSpec::half_squared_norm(2), Region::ball(2, 2.0), 256, 1), 2.0, 1e-12);
}

TEST(LipschitzEstimate, DiskChartMatchesSlopeOracle) {
    // max |f'(t)| = t / sqrt(1 - t^2) at t = 0.6
    const double oracle_slope = 0.6 / std::sqrt(1.0 - 0.36);
    EXPECT_DOUBLE_EQ(oracle_slope, 0.75);
    const double estimate = lipschitz_estimate(disk_chart(), Region::ball(1, 0.6), 4096, 17);
    EXPECT_NEAR(estimate, oracle_slope, 5e-3);
    EXPECT_LE(estimate, oracle_slope + 1e-6);
}

TEST(LipschitzEstimate, MonotoneUnderRegionInclusion) {
    for (const auto& f : {FunctionSpec::half_squared_norm(2), FunctionSpec::abs_coordinate(2, 1), lse2()}) {
        double previous = 0.0;
        for (double r : {0.25, 0.5, 1.0, 2.0}) {
            const auto exact = exact_lipschitz_bound(f, Region::ball(2, r));
            ASSERT_TRUE(exact.has_value());
            EXPECT_GE(*exact, previous);
            previous = *exact;
        }
    }
}

TEST(LipschitzEstimate, RejectsTooFewSamples) {
    EXPECT_THROW(lipschitz_estimate(FunctionSpec::half_squared_norm(2), Region::ball(2, 1.0), 1, 0), DomainError);
}

TEST(ConvexityCheck, ConvexFamiliesHaveNoViolations) {
    const std::vector<FunctionSpec> families{FunctionSpec::half_squared_norm(2), FunctionSpec::abs_coordinate(2, 0),
                                             FunctionSpec::norm_scaled(2, 2.5), lse2(),
                                             FunctionSpec::max_affine({{make_point({1, 2}), 0.1}, {make_point({-1, 0}), 0.0},
                                                                       {make_point({0, -3}), 0.5}})};
    for (const auto& f : families) {
        const auto report = convexity_check(f, Region::ball(2, 1.0), 10000, 1e-9, 5);
        EXPECT_EQ(report.violations, 0) << f.family_name();
        EXPECT_EQ(report.samples, 10000);
    }
}

TEST(ConvexityCheck, SaddleViolatesAndGridOracleAgreesOnSign) {
    const auto f = saddle();
    const auto report = convexity_check(f, Region::ball(2, 1.0), 2000, 1e-9, 5);
    EXPECT_GE(report.violations, 1);
    EXPECT_GT(report.worst_gap, 0.0);
    const double grid_worst = oracle::worst_midpoint_gap([&](const Point& x) { return evaluate(f, x); }, 1.0, 8);
    // Antipodal pair along x2 through 0: 0 - (-1 - 1)/2 = 1.
    EXPECT_NEAR(grid_worst, 1.0, 1e-12);
    EXPECT_LE(report.worst_gap, grid_worst + 1e-12);
}

TEST(ConvexityCheck, RejectsBadArguments) {
    EXPECT_THROW(convexity_check(saddle(), Region::ball(2, 1.0), 0, 0.0, 0), DomainError);
    EXPECT_THROW(convexity_check(saddle(), Region::ball(2, 1.0), 10, -1.0, 0), DomainError);
}

TEST(RestrictToSpan, NormIsOrthogonallyInvariant) {
    const auto f = FunctionSpec::half_squared_norm(5);
    Point e1 = Point::Zero(5);
    e1[0] = 1.0;
    Point e12 = e1;
    e12[1] = 1.0;
    const auto r = restrict_to_span(f, Point::Zero(5), {e1, e12});
    EXPECT_EQ(r.dimension(), 2);
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const Point c = gaussian_point(rng, 2);
        EXPECT_NEAR(evaluate(r, c), 0.5 * c.squaredNorm(), 1e-12);
    }
}

TEST(RestrictToSpan, AffineCoefficientsAreProjections) {
    const Point a = make_point({1.0, -2.0, 0.5});
    const auto f = FunctionSpec::affine(a, 3.0);
    const Point base = make_point({0.1, 0.2, 0.3});
    const auto r = restrict_to_span(f, base, {base + make_point({1, 1, 0}), base + make_point({0, 0, 2})});
    const auto& basis = std::get<Restricted>(r.family()).basis;
    const Point c = make_point({0.7, -0.4});
    EXPECT_NEAR(evaluate(r, c), evaluate(f, base) + (basis.transpose() * a).dot(c), 1e-12);
}

TEST(RestrictToSpan, FoldAlongDiagonal) {
    const auto r = restrict_to_span(FunctionSpec::abs_coordinate(3, 0), Point::Zero(3), {make_point({1, 1, 0})});
    for (double c : {-2.0, -0.3, 0.0, 0.9}) EXPECT_NEAR(evaluate(r, make_point({c})), std::abs(c) / std::sqrt(2.0), 1e-15);
}

TEST(RestrictToSpan, PreservesEvaluationOnTheSpan) {
    const auto f = lse2();
    const Point base = make_point({0.2, -0.1});
    const auto r = restrict_to_span(f, base, {make_point({1.2, 0.4}), make_point({0.2, 0.9}), make_point({1.0, 1.0})});
    const auto& E = std::get<Restricted>(r.family()).basis;
    EXPECT_EQ(E.cols(), 2);
    EXPECT_LT((E.transpose() * E - Matrix::Identity(2, 2)).norm(), 1e-14);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const Point c = gaussian_point(rng, 2);
        EXPECT_NEAR(evaluate(r, c), evaluate(f, base + E * c), 1e-10);
    }
    EXPECT_EQ(convexity_check(r, Region::ball(2, 1.0), 2000, 1e-9, 1).violations, 0);
}

TEST(RestrictToSpan, DegenerateSpanErrors) {
    const Point base = make_point({1, 2});
    EXPECT_THROW(restrict_to_span(lse2(), base, {base, base}), DegenerateSpanError);
    EXPECT_THROW(restrict_to_span(lse2(), base, {}), DomainError);
}

TEST(BoundaryChart, UnitDiskIsALowerSemicircle) {
    const auto f = disk_chart();
    EXPECT_EQ(f.dimension(), 1);
    for (double t : {0.0, 0.3, -0.3, 0.6, -0.6})
        EXPECT_NEAR(evaluate(f, make_point({t})), 1.0 - std::sqrt(1.0 - t * t), 1e-10) << t;
    EXPECT_NEAR(evaluate(f, make_point({0.6})), 0.2, 1e-10);
    const auto& chart = *std::get<BoundaryChart>(f.family()).chart;
    EXPECT_NEAR(chart.up_direction().norm(), 1.0, 1e-15);
    EXPECT_NEAR(chart.hyperplane_basis().col(0).dot(chart.up_direction()), 0.0, 1e-15);
}

TEST(BoundaryChart, FlatHalfspaceBoundary) {
    const ConvexBody body(2, {Halfspace{make_point({0, -1}), 0.0}, BallConstraint{make_point({0, 0}), 2.0}},
                          make_point({0, 1}));
    const auto f = lower_boundary_function(body, make_point({0, 0}), make_point({0, 1}), 0.5, 1e-10);
    for (double t : {-0.5, -0.1, 0.0, 0.4}) EXPECT_NEAR(evaluate(f, make_point({t})), 0.0, 1e-10);
}

TEST(BoundaryChart, ConeBoundaryIsAbsoluteValue) {
    // x2 >= |x1|  <=>  x1 - x2 <= 0 and -x1 - x2 <= 0
    const ConvexBody body(2,
                          {Halfspace{make_point({1, -1}), 0.0}, Halfspace{make_point({-1, -1}), 0.0},
                           BallConstraint{make_point({0, 1}), 2.0}},
                          make_point({0, 1}));
    const auto f = lower_boundary_function(body, make_point({0, 0}), make_point({0, 1}), 0.5, 1e-10);
    for (double t : {-0.5, -0.2, 0.0, 0.35}) EXPECT_NEAR(evaluate(f, make_point({t})), std::abs(t), 1e-9);
}

TEST(BoundaryChart, ConvexAndDeterministic) {
    const auto f = disk_chart();
    EXPECT_EQ(convexity_check(f, Region::ball(1, 0.6), 5000, 1e-9, 2).violations, 0);
    const Point x = make_point({0.4321});
    EXPECT_EQ(evaluate(f, x), evaluate(f, x));
}

TEST(BoundaryChart, ThreeDimensionalBall) {
    const ConvexBody ball(3, {BallConstraint{Point::Zero(3), 2.0}}, Point::Zero(3));
    const auto f = lower_boundary_function(ball, make_point({0, 0, -2}), Point::Zero(3), 1.0, 1e-10);
    ASSERT_EQ(f.dimension(), 2);
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        const Point x = sample_in_region(rng, Region::ball(2, 1.0));
        EXPECT_NEAR(evaluate(f, x), 2.0 - std::sqrt(4.0 - x.squaredNorm()), 1e-9);
    }
}

TEST(BoundaryChart, Errors) {
    EXPECT_THROW(lower_boundary_function(unit_disk(), make_point({0, -1}), make_point({0, 0}), 1.5, 1e-8), ChartRadiusError);
    EXPECT_THROW(lower_boundary_function(unit_disk(), make_point({0, -1}), make_point({0, 1}), 0.5, 1e-8), PreconditionError);
    EXPECT_THROW(lower_boundary_function(unit_disk(), make_point({0, -0.5}), make_point({0, 0}), 0.5, 1e-8), PreconditionError);
    const auto f = disk_chart();
    EXPECT_THROW(evaluate(f, make_point({0.7})), DomainError);
}

TEST(ConvexBody, InteriorPointMustHaveSlack) {
    EXPECT_THROW(ConvexBody(2, {BallConstraint{make_point({0, 0}), 1.0}}, make_point({1, 0})), PreconditionError);
    EXPECT_THROW(ConvexBody(2, {Halfspace{make_point({0, 0}), 1.0}}, make_point({0, 0})), DomainError);
}

TEST(FunctionSpec, NonconvexQuadraticIsFlagged) {
    EXPECT_TRUE(known_nonconvex(saddle()));
    EXPECT_FALSE(known_nonconvex(FunctionSpec::half_squared_norm(2)));
    EXPECT_TRUE(is_c11(FunctionSpec::half_squared_norm(2)));
    EXPECT_FALSE(is_c11(FunctionSpec::abs_coordinate(2, 0)));
}
