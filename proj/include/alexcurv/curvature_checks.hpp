#pragma once

#include "intrinsic_metric.hpp"
#include "parallel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace alexcurv {

/// Arccos arguments within this distance of [-1, 1] are clamped.
inline constexpr double kClampTolerance = 1e-9;

/// Cosine of the comparison angle at the middle vertex y: the Euclidean triangle with sides
/// d(x,y), d(y,z), d(x,z).
inline double comparison_cosine(double d_xy, double d_yz, double d_xz) {
    return (d_xy * d_xy - d_xz * d_xz + d_yz * d_yz) / (2.0 * d_xy * d_yz);
}

/// Comparison angle at y for the distances d(x,y), d(y,z), d(x,z).
inline double comparison_angle(double d_xy, double d_yz, double d_xz) {
    if (!(d_xy > 0.0) || !(d_yz > 0.0) || !(d_xz > 0.0) || !std::isfinite(d_xy) || !std::isfinite(d_yz) ||
        !std::isfinite(d_xz))
        throw DomainError("comparison_angle: distances must be positive and finite");
    const double cosine = comparison_cosine(d_xy, d_yz, d_xz);
    if (cosine > 1.0 + kClampTolerance || cosine < -1.0 - kClampTolerance)
        throw TriangleInequalityError("comparison_angle: distances violate the triangle inequality");
    return std::acos(std::clamp(cosine, -1.0, 1.0));
}

/// Angle sum at the apex a minus 2 pi:  <bac + <cap + <pab - 2 pi.
inline double quadruple_excess(double d_ab, double d_ac, double d_ap, double d_bc, double d_bp, double d_cp) {
    return comparison_angle(d_ab, d_ac, d_bc) + comparison_angle(d_ac, d_ap, d_cp) +
           comparison_angle(d_ap, d_ab, d_bp) - 2.0 * std::numbers::pi;
}

struct Quadruple {
    Point a; ///< apex
    Point b;
    Point c;
    Point p;

    std::array<const Point*, 4> points() const { return {&a, &b, &c, &p}; }

    double min_separation() const {
        const auto pts = points();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) best = std::min(best, (*pts[i] - *pts[j]).norm());
        return best;
    }
};

enum class Verdict { satisfied, violated, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    default: return "inconclusive";
    }
}

/// Pair order used for the six distances of a quadruple.
inline constexpr std::array<std::pair<int, int>, 6> kQuadruplePairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<const char*, 6> kQuadruplePairNames{"ab", "ac", "ap", "bc", "bp", "cp"};

struct QuadrupleReport {
    Quadruple quad;
    std::array<DistanceEstimate, 6> distances; ///< ab, ac, ap, bc, bp, cp
    std::array<double, 3> angles{};            ///< <bac, <cap, <pab
    double angle_sum = std::numeric_limits<double>::quiet_NaN();
    double excess = std::numeric_limits<double>::quiet_NaN();
    double slack = std::numeric_limits<double>::quiet_NaN();
    Verdict verdict = Verdict::inconclusive;
    std::string diagnostic;
};

struct QuadrupleOptions {
    DistanceOptions distance;
    double flat_calibration = 1e-6; ///< |excess| <= slack < this is reported as satisfied
    double safety_factor = 2.0;
};

struct ApexAngles {
    std::array<double, 3> angles{};
    double angle_sum = 0.0;
    double excess = 0.0;
    double slack = 0.0;
};

namespace detail {

struct AngleWithUncertainty {
    double angle;
    double uncertainty;
};

/// Comparison angle at the vertex joining sides d1, d2 (opposite side d3), with the range of
/// the angle when the sides move within their gaps. The cosine is propagated to first order
/// and mapped through arccos exactly, which stays bounded near +-1.
inline AngleWithUncertainty angle_with_uncertainty(double d1, double d2, double d3, double g1, double g2, double g3) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double cosine = comparison_cosine(d1, d2, d3);
    const double dc1 = (d1 * d1 - d2 * d2 + d3 * d3) / (2.0 * d1 * d1 * d2);
    const double dc2 = (d2 * d2 - d1 * d1 + d3 * d3) / (2.0 * d1 * d2 * d2);
    const double dc3 = d3 / (d1 * d2);
    const double spread = std::abs(dc1) * g1 + std::abs(dc2) * g2 + std::abs(dc3) * g3 + 8.0 * eps * (1.0 + std::abs(cosine));
    const double excess_out = std::abs(cosine) - 1.0;
    if (excess_out > kClampTolerance && excess_out > spread)
        throw TriangleInequalityError("distances violate the triangle inequality beyond their bound gaps");
    const double angle = std::acos(std::clamp(cosine, -1.0, 1.0));
    const double widest = std::acos(std::clamp(cosine - spread, -1.0, 1.0));
    const double narrowest = std::acos(std::clamp(cosine + spread, -1.0, 1.0));
    return {angle, std::max(widest - angle, angle - narrowest)};
}

} // namespace detail

/// Apex angles, excess and slack from six distance values and their bound gaps (pair order
/// ab, ac, ap, bc, bp, cp).
inline ApexAngles apex_angles(const std::array<double, 6>& d, const std::array<double, 6>& gaps,
                              double safety_factor = 2.0) {
    for (double v : d)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("apex_angles: distances must be positive and finite");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::array<double, 6> g{};
    for (std::size_t i = 0; i < 6; ++i) g[i] = std::max(0.0, gaps[i]) + 4.0 * eps * d[i];
    const auto bac = detail::angle_with_uncertainty(d[0], d[1], d[3], g[0], g[1], g[3]);
    const auto cap = detail::angle_with_uncertainty(d[1], d[2], d[5], g[1], g[2], g[5]);
    const auto pab = detail::angle_with_uncertainty(d[2], d[0], d[4], g[2], g[0], g[4]);
    ApexAngles out;
    out.angles = {bac.angle, cap.angle, pab.angle};
    out.angle_sum = bac.angle + cap.angle + pab.angle;
    out.excess = out.angle_sum - 2.0 * std::numbers::pi;
    out.slack = safety_factor * (bac.uncertainty + cap.uncertainty + pab.uncertainty) + 16.0 * eps * 2.0 * std::numbers::pi;
    return out;
}

inline Verdict classify(double excess, double slack, double flat_calibration) {
    if (excess > slack) return Verdict::violated;
    if (excess < -slack) return Verdict::satisfied;
    if (slack < flat_calibration) return Verdict::satisfied;
    return Verdict::inconclusive;
}

/// Six intrinsic distances, the three comparison angles at the apex, and a verdict on the
/// quadruple condition with slack propagated from the distance bound gaps.
inline QuadrupleReport check_quadruple(const GraphSurface& surface, const Quadruple& quad,
                                       const QuadrupleOptions& opts = {}) {
    for (const Point* p : quad.points()) {
        require_dimension(*p, surface.dimension(), "check_quadruple point");
        if (!surface.domain().contains(*p)) throw DomainError("check_quadruple: point outside the check region");
    }
    if (!(quad.min_separation() > 1e-9)) throw DomainError("check_quadruple: points must be pairwise distinct");

    QuadrupleReport report;
    report.quad = quad;
    const auto pts = quad.points();
    std::array<double, 6> values{};
    std::array<double, 6> gaps{};
    for (std::size_t k = 0; k < 6; ++k) {
        const auto [i, j] = kQuadruplePairs[k];
        report.distances[k] =
            intrinsic_distance(surface, *pts[static_cast<std::size_t>(i)], *pts[static_cast<std::size_t>(j)],
                               pair_options(opts.distance, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        values[k] = report.distances[k].value;
        gaps[k] = report.distances[k].gap();
    }
    try {
        const ApexAngles angles = apex_angles(values, gaps, opts.safety_factor);
        report.angles = angles.angles;
        report.angle_sum = angles.angle_sum;
        report.excess = angles.excess;
        report.slack = angles.slack;
        report.verdict = classify(angles.excess, angles.slack, opts.flat_calibration);
    } catch (const TriangleInequalityError& e) {
        report.verdict = Verdict::inconclusive;
        report.diagnostic = e.what();
    }
    return report;
}

/// Uniform quadruple of distinct points in the region.
inline Quadruple sample_quadruple(Rng& rng, const Region& region) {
    for (;;) {
        Quadruple q{sample_in_region(rng, region), sample_in_region(rng, region), sample_in_region(rng, region),
                    sample_in_region(rng, region)};
        if (q.min_separation() > 1e-9) return q;
    }
}

struct QuadrupleAggregate {
    int checked = 0;
    int satisfied = 0;
    int violated = 0;
    int inconclusive = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    double max_slack = 0.0;
    std::optional<std::size_t> argmax_index;
    std::optional<Quadruple> argmax_quad;
    std::vector<QuadrupleReport> reports; ///< in sample order
};

/// Checks `count` uniformly sampled quadruples; quadruple i uses seed derive_seed(rng_seed, i),
/// so the result does not depend on the number of jobs.
inline QuadrupleAggregate sample_quadruple_condition(const GraphSurface& surface, const Region& region, int count,
                                                     const QuadrupleOptions& opts, std::uint64_t rng_seed,
                                                     int jobs = 1) {
    if (count < 1) throw DomainError("sample_quadruple_condition: count must be >= 1");
    std::vector<QuadrupleReport> reports(static_cast<std::size_t>(count));
    parallel_for(reports.size(), jobs, [&](std::size_t i) {
        const std::uint64_t quad_seed = derive_seed(rng_seed, static_cast<std::uint64_t>(i));
        Rng rng(quad_seed);
        const Quadruple quad = sample_quadruple(rng, region);
        QuadrupleOptions local = opts;
        local.distance.rng_seed = derive_seed(quad_seed, "distances");
        try {
            reports[i] = check_quadruple(surface, quad, local);
        } catch (const Error& e) {
            QuadrupleReport failed;
            failed.quad = quad;
            failed.diagnostic = e.what();
            reports[i] = std::move(failed);
        }
    });
    QuadrupleAggregate agg;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        ++agg.checked;
        switch (r.verdict) {
        case Verdict::satisfied: ++agg.satisfied; break;
        case Verdict::violated: ++agg.violated; break;
        default: ++agg.inconclusive; break;
        }
        if (std::isfinite(r.excess) && r.excess > agg.max_excess) {
            agg.max_excess = r.excess;
            agg.argmax_index = i;
            agg.argmax_quad = r.quad;
        }
        if (std::isfinite(r.slack)) agg.max_slack = std::max(agg.max_slack, r.slack);
    }
    agg.reports = std::move(reports);
    return agg;
}

struct SearchOptions {
    QuadrupleOptions check;
    int seeds = 32;            ///< random quadruples evaluated before the ascent
    int max_rounds = 40;       ///< coordinate-ascent rounds
    double initial_step = 0.1; ///< relative to the region radius
    double min_step = 1e-3;    ///< relative to the region radius
};

struct SearchResult {
    QuadrupleReport best;
    double objective = -std::numeric_limits<double>::infinity(); ///< excess - slack of best
    int evaluations = 0;
    std::vector<QuadrupleReport> violations; ///< every evaluated quadruple with verdict violated
};

/// Adversarial search maximising excess - slack: random seeding followed by coordinate ascent
/// on the twelve (4 x n) point coordinates.
inline SearchResult search_violation(const GraphSurface& surface, const Region& region, const SearchOptions& opts,
                                     std::uint64_t rng_seed) {
    SearchResult result;
    Rng rng(derive_seed(rng_seed, "search"));
    const auto evaluate_quad = [&](const Quadruple& q) -> std::pair<double, QuadrupleReport> {
        ++result.evaluations;
        QuadrupleReport report;
        try {
            report = check_quadruple(surface, q, opts.check);
        } catch (const Error& e) {
            report.quad = q;
            report.diagnostic = e.what();
        }
        const double objective = std::isfinite(report.excess) && std::isfinite(report.slack)
                                     ? report.excess - report.slack
                                     : -std::numeric_limits<double>::infinity();
        if (report.verdict == Verdict::violated) result.violations.push_back(report);
        return {objective, std::move(report)};
    };

    std::optional<QuadrupleReport> best;
    for (int s = 0; s < std::max(1, opts.seeds); ++s) {
        auto [objective, report] = evaluate_quad(sample_quadruple(rng, region));
        if (!best || objective > result.objective) {
            result.objective = objective;
            best = std::move(report);
        }
    }

    double step = opts.initial_step * region.radius();
    const double min_step = opts.min_step * region.radius();
    const Eigen::Index n = region.dimension();
    for (int round = 0; round < opts.max_rounds && step >= min_step; ++round) {
        bool improved = false;
        for (int which = 0; which < 4; ++which) {
            for (Eigen::Index d = 0; d < n; ++d) {
                for (double sign : {1.0, -1.0}) {
                    Quadruple trial = best->quad;
                    Point* target = which == 0 ? &trial.a : which == 1 ? &trial.b : which == 2 ? &trial.c : &trial.p;
                    (*target)[d] += sign * step;
                    *target = region.project(*target);
                    if (!(trial.min_separation() > 1e-6 * region.radius())) continue;
                    auto [objective, report] = evaluate_quad(trial);
                    if (objective > result.objective) {
                        result.objective = objective;
                        best = std::move(report);
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    result.best = std::move(*best);
    return result;
}

} // namespace alexcurv
