#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace alexcurv;
using std::numbers::pi;

namespace {

GraphSurface flat() { return GraphSurface(FunctionSpec::zero(2), Region::ball(2, 2.0), 0.0); }
GraphSurface paraboloid() { return GraphSurface(FunctionSpec::half_squared_norm(2), Region::ball(2, 1.0), 1.0); }

QuadrupleOptions quick() {
    QuadrupleOptions o;
    o.distance.k_max = 9;
    o.distance.m = 64;
    o.distance.multistart = 1;
    return o;
}

std::array<double, 6> quad_distances(const std::array<Point, 4>& pts) {
    std::array<double, 6> out{};
    for (std::size_t k = 0; k < 6; ++k) {
        const auto [i, j] = kQuadruplePairs[k];
        out[k] = (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm();
    }
    return out;
}

} // namespace

TEST(ComparisonAngle, Equilateral) { EXPECT_NEAR(comparison_angle(1, 1, 1), pi / 3.0, 1e-12); }
TEST(ComparisonAngle, Pythagorean) { EXPECT_NEAR(comparison_angle(3, 4, 5), pi / 2.0, 1e-12); }
TEST(ComparisonAngle, Collinear) { EXPECT_NEAR(comparison_angle(1, 1, 2), pi, 1e-12); }

TEST(ComparisonAngle, ClampToleranceAndErrors) {
    EXPECT_NEAR(comparison_angle(1, 1, 2 + 1e-10), pi, 1e-12);
    EXPECT_THROW(comparison_angle(1, 1, 2.1), TriangleInequalityError);
    EXPECT_THROW(comparison_angle(1, 5, 1), TriangleInequalityError);
    EXPECT_THROW(comparison_angle(0, 1, 1), DomainError);
    EXPECT_THROW(comparison_angle(1, -1, 1), DomainError);
    EXPECT_THROW(comparison_angle(1, 1, std::nan("")), DomainError);
}

TEST(ComparisonAngle, SymmetryScaleInvarianceAndRange) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 10.0);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    int checked = 0;
    while (checked < 10000) {
        const double a = u(rng);
        const double b = u(rng);
        const double c = u(rng);
        if (c >= a + b || c <= std::abs(a - b)) continue;
        ++checked;
        const double angle = comparison_angle(a, b, c);
        EXPECT_NEAR(angle, comparison_angle(b, a, c), 1e-12);
        const double lambda = scale(rng);
        EXPECT_NEAR(angle, comparison_angle(lambda * a, lambda * b, lambda * c), 1e-12);
        EXPECT_GE(angle, 0.0);
        EXPECT_LE(angle, pi);
    }
}

TEST(QuadrupleExcess, PlanarInteriorApex) {
    const std::array<Point, 4> pts{make_point({0, 0}), make_point({1, 0}), make_point({0, 1}), make_point({-1, -1})};
    const auto d = quad_distances(pts);
    EXPECT_NEAR(quadruple_excess(d[0], d[1], d[2], d[3], d[4], d[5]), 0.0, 1e-12);
}

TEST(QuadrupleExcess, PlanarExteriorApex) {
    const std::array<Point, 4> pts{make_point({0, 0}), make_point({1, 0}), make_point({0, 1}), make_point({1, 1})};
    const auto d = quad_distances(pts);
    EXPECT_NEAR(quadruple_excess(d[0], d[1], d[2], d[3], d[4], d[5]), -pi, 1e-12);
}

TEST(QuadrupleExcess, RoundSphereWithEquatorialSatellites) {
    // Exact spherical distances: apex legs pi/2, satellite pairs 2 pi/3. Each apex angle is
    // arccos(1 - (2pi/3)^2 / (2 (pi/2)^2)) = arccos(1/9), so the raw excess is
    // 3 arccos(1/9) - 2 pi = -1.9045..., i.e. the condition holds for this quadruple.
    const double leg = pi / 2.0;
    const double side = 2.0 * pi / 3.0;
    const double excess = quadruple_excess(leg, leg, leg, side, side, side);
    EXPECT_NEAR(excess, 3.0 * std::acos(1.0 / 9.0) - 2.0 * pi, 1e-12);
    EXPECT_LT(excess, 0.0);
}

TEST(QuadrupleExcess, EuclideanSpaceNeverExceeds) {
    // Any four points of R^3 satisfy the condition.
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        std::array<Point, 4> pts;
        for (auto& p : pts) p = gaussian_point(rng, 3);
        const auto d = quad_distances(pts);
        EXPECT_LE(quadruple_excess(d[0], d[1], d[2], d[3], d[4], d[5]), 1e-12);
    }
}

TEST(ApexAngles, SlackDominatesEveryCornerOfTheDistanceBox) {
    Rng rng(9);
    int tested = 0;
    while (tested < 500) {
        std::array<Point, 4> pts;
        for (auto& p : pts) p = gaussian_point(rng, 3);
        const auto d = quad_distances(pts);
        std::array<double, 6> gaps{};
        for (auto& g : gaps) g = 1e-4 * uniform01(rng);
        std::array<double, 6> lower{};
        for (std::size_t k = 0; k < 6; ++k) lower[k] = d[k] - gaps[k];
        ApexAngles center;
        try {
            center = apex_angles(d, gaps, 2.0);
        } catch (const TriangleInequalityError&) {
            continue;
        }
        // Skip near-degenerate apex triangles; there the slack is allowed to cover [0, pi].
        if (center.slack > 0.1) continue;
        ++tested;
        for (int corner = 0; corner < 64; ++corner) {
            std::array<double, 6> v{};
            for (std::size_t k = 0; k < 6; ++k) v[k] = (corner >> k) & 1 ? d[k] : lower[k];
            double sum;
            try {
                sum = quadruple_excess(v[0], v[1], v[2], v[3], v[4], v[5]);
            } catch (const TriangleInequalityError&) {
                continue;
            }
            EXPECT_LE(std::abs(sum - center.excess), center.slack);
        }
    }
}

TEST(Classify, VerdictTable) {
    EXPECT_EQ(classify(0.2, 0.1, 1e-6), Verdict::violated);
    EXPECT_EQ(classify(-0.2, 0.1, 1e-6), Verdict::satisfied);
    EXPECT_EQ(classify(0.05, 0.1, 1e-6), Verdict::inconclusive);
    EXPECT_EQ(classify(1e-9, 1e-8, 1e-6), Verdict::satisfied);
    EXPECT_EQ(classify(std::nan(""), 0.1, 1e-6), Verdict::inconclusive);
}

TEST(CheckQuadruple, FlatInteriorApexIsSatisfied) {
    const Quadruple q{make_point({0, 0}), make_point({1, 0}), make_point({0, 1}), make_point({-1, -1})};
    const auto r = check_quadruple(flat(), q);
    EXPECT_NEAR(r.excess, 0.0, 1e-9);
    EXPECT_LE(r.slack, 1e-6);
    EXPECT_EQ(r.verdict, Verdict::satisfied);
    for (double a : r.angles) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, pi);
    }
}

TEST(CheckQuadruple, FlatAnglesAreEuclideanAngles) {
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const Quadruple q = sample_quadruple(rng, Region::ball(2, 1.0));
        const auto r = check_quadruple(flat(), q);
        EXPECT_NEAR(r.angles[0], oracle::euclidean_angle(q.a, q.b, q.c), 1e-9);
        EXPECT_NEAR(r.angles[1], oracle::euclidean_angle(q.a, q.c, q.p), 1e-9);
        EXPECT_NEAR(r.angles[2], oracle::euclidean_angle(q.a, q.p, q.b), 1e-9);
        EXPECT_NE(r.verdict, Verdict::violated);
    }
}

TEST(CheckQuadruple, ParaboloidAgreesWithShootingOracle) {
    // Oracle: all six distances by geodesic shooting; the paraboloid is convex so the exact
    // excess is non-positive, and the checker must never report a violation.
    Rng rng(2);
    const Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 10; ++i) {
        const Quadruple q = sample_quadruple(rng, Region::ball(2, 1.0));
        const auto r = check_quadruple(paraboloid(), q, quick());
        EXPECT_NE(r.verdict, Verdict::violated);
        const auto pts = q.points();
        std::array<double, 6> exact{};
        bool ok = true;
        for (std::size_t k = 0; k < 6 && ok; ++k) {
            const Eigen::Vector2d from = *pts[static_cast<std::size_t>(kQuadruplePairs[k].first)];
            const Eigen::Vector2d to = *pts[static_cast<std::size_t>(kQuadruplePairs[k].second)];
            const Eigen::Vector2d dir = to - from;
            try {
                exact[k] = oracle::shooting_distance(A, Eigen::Vector2d::Zero(), from, to, std::atan2(dir[1], dir[0]),
                                                     0.5, 4.0);
            } catch (const std::exception&) {
                ok = false;
            }
            if (ok) {
                EXPECT_GE(r.distances[k].upper_bound, exact[k] - 1e-9);
                EXPECT_LE(r.distances[k].lower_bound, exact[k] + 1e-9);
            }
        }
        if (!ok) continue;
        try {
            EXPECT_LE(quadruple_excess(exact[0], exact[1], exact[2], exact[3], exact[4], exact[5]), 1e-9);
        } catch (const TriangleInequalityError&) {
        }
    }
}

TEST(CheckQuadruple, Preconditions) {
    const Quadruple outside{make_point({0, 0}), make_point({3, 0}), make_point({0, 1}), make_point({-1, -1})};
    EXPECT_THROW(check_quadruple(flat(), outside), DomainError);
    const Quadruple repeated{make_point({0, 0}), make_point({0, 0}), make_point({0, 1}), make_point({-1, -1})};
    EXPECT_THROW(check_quadruple(flat(), repeated), DomainError);
}

TEST(SampleQuadrupleCondition, FlatSurfaceHasNoViolations) {
    const auto agg = sample_quadruple_condition(flat(), Region::ball(2, 1.0), 200, QuadrupleOptions{}, 7);
    EXPECT_EQ(agg.checked, 200);
    EXPECT_EQ(agg.violated, 0);
    EXPECT_EQ(agg.satisfied + agg.inconclusive + agg.violated, agg.checked);
    EXPECT_LE(agg.max_excess, agg.max_slack);
    ASSERT_TRUE(agg.argmax_index.has_value());
    EXPECT_EQ(agg.reports[*agg.argmax_index].excess, agg.max_excess);
}

TEST(SampleQuadrupleCondition, IndependentOfJobCount) {
    const auto serial = sample_quadruple_condition(paraboloid(), Region::ball(2, 1.0), 6, quick(), 99, 1);
    const auto parallel = sample_quadruple_condition(paraboloid(), Region::ball(2, 1.0), 6, quick(), 99, 3);
    ASSERT_EQ(serial.reports.size(), parallel.reports.size());
    for (std::size_t i = 0; i < serial.reports.size(); ++i) {
        EXPECT_EQ(serial.reports[i].excess, parallel.reports[i].excess);
        EXPECT_EQ(serial.reports[i].slack, parallel.reports[i].slack);
    }
    EXPECT_EQ(serial.max_excess, parallel.max_excess);
}

TEST(SampleQuadrupleCondition, ParaboloidHasNoViolations) {
    const auto agg = sample_quadruple_condition(paraboloid(), Region::ball(2, 1.0), 20, quick(), 3);
    EXPECT_EQ(agg.violated, 0);
}

TEST(SampleQuadrupleCondition, RejectsZeroCount) {
    EXPECT_THROW(sample_quadruple_condition(flat(), Region::ball(2, 1.0), 0, QuadrupleOptions{}, 7), DomainError);
}

TEST(SearchViolation, FlatBestExcessWithinSlack) {
    SearchOptions o;
    o.seeds = 8;
    o.max_rounds = 3;
    const auto r = search_violation(flat(), Region::ball(2, 1.0), o, 5);
    EXPECT_LE(r.best.excess, r.best.slack);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_GT(r.evaluations, 8);
}

TEST(SearchViolation, ParaboloidBestExcessWithinSlack) {
    SearchOptions o;
    o.check = quick();
    o.seeds = 4;
    o.max_rounds = 2;
    const auto r = search_violation(paraboloid(), Region::ball(2, 1.0), o, 5);
    EXPECT_LE(r.best.excess, r.best.slack);
    EXPECT_TRUE(r.violations.empty());
}
