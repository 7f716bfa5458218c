#pragma once

#include "convex_functions.hpp"

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <vector>

namespace alexcurv {

/// Graph of a function over a ball-shaped domain, with the Lipschitz data of its lift map.
class GraphSurface {
  public:
    /// L is raised to at least 1.
    GraphSurface(FunctionSpec function, Region domain, double lipschitz)
        : function_(std::move(function)), domain_(std::move(domain)),
          lipschitz_(std::max(1.0, lipschitz)), bilipschitz_(std::sqrt(1.0 + lipschitz_ * lipschitz_)) {
        if (domain_.dimension() != function_.dimension())
            throw DomainError("GraphSurface: domain and function dimensions differ");
        if (!std::isfinite(lipschitz)) throw DomainError("GraphSurface: Lipschitz bound must be finite");
    }

    /// L from lipschitz_estimate over the domain.
    static GraphSurface with_estimated_lipschitz(FunctionSpec function, Region domain, int samples = 4096,
                                                 std::uint64_t seed = 0) {
        const double L = lipschitz_estimate(function, domain, samples, seed);
        return GraphSurface(std::move(function), std::move(domain), L);
    }

    const FunctionSpec& function() const noexcept { return function_; }
    const Region& domain() const noexcept { return domain_; }
    Eigen::Index dimension() const noexcept { return function_.dimension(); }
    double lipschitz_bound() const noexcept { return lipschitz_; }
    /// sqrt(1 + L^2)
    double bilipschitz_bound() const noexcept { return bilipschitz_; }

    double height(const Point& x) const {
        require_dimension(x, dimension(), "GraphSurface point");
        if (!domain_.contains(x)) throw DomainError("GraphSurface: point outside the domain region");
        return evaluate(function_, x);
    }

  private:
    FunctionSpec function_;
    Region domain_;
    double lipschitz_;
    double bilipschitz_;
};

inline LiftedPoint lift(const GraphSurface& surface, const Point& x) { return LiftedPoint{x, surface.height(x)}; }

namespace detail {

/// Chord sum of the lifted segment p -> q over m equal parameter steps, given the endpoint
/// heights. Only interior samples are evaluated. `scratch` must have the ambient dimension.
inline double chord_sum(const FunctionSpec& f, const Point& p, double fp, const Point& q, double fq, int m,
                        Point& scratch) {
    const double base_step2 = (q - p).squaredNorm() / (static_cast<double>(m) * static_cast<double>(m));
    double total = 0.0;
    double previous = fp;
    for (int j = 1; j <= m; ++j) {
        double current;
        if (j == m) {
            current = fq;
        } else {
            const double t = static_cast<double>(j) / static_cast<double>(m);
            scratch = (1.0 - t) * p + t * q;
            current = evaluate(f, scratch);
        }
        const double dh = current - previous;
        total += std::sqrt(base_step2 + dh * dh);
        previous = current;
    }
    return total;
}

/// Length bound for a convex (or concave) arc over one sample interval of base length dx with
/// chord slope c, given slopes s1 at its left end and s2 at its right end: the arc lies between
/// the chord and the two tangent lines, so it is no longer than the path through their
/// intersection. Inconsistent slope patterns fall back to the chord.
inline double tangent_triangle(double dx, double c, double s1, double s2) {
    const bool convex = s1 <= c && c <= s2;
    const bool concave = s1 >= c && c >= s2;
    if (!(convex || concave) || s1 == s2) return dx * std::sqrt(1.0 + c * c);
    const double tau = std::clamp(dx * (s2 - c) / (s2 - s1), 0.0, dx);
    return std::hypot(tau, s1 * tau) + std::hypot(dx - tau, c * dx - s1 * tau);
}

struct SegmentBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Chord sum and tangent-triangle bound of the lifted segment p -> q over m equal steps.
/// Interior intervals use the slopes of the neighbouring chords; end intervals use the
/// neighbouring chord on one side and slope -+lipschitz on the other.
inline SegmentBounds segment_bounds(const FunctionSpec& f, const Point& p, double fp, const Point& q, double fq,
                                    int m, double lipschitz, Point& scratch, std::vector<double>& heights) {
    heights.resize(static_cast<std::size_t>(m) + 1);
    heights.front() = fp;
    heights.back() = fq;
    for (int j = 1; j < m; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(m);
        scratch = (1.0 - t) * p + t * q;
        heights[static_cast<std::size_t>(j)] = evaluate(f, scratch);
    }
    const double dx = (q - p).norm() / static_cast<double>(m);
    SegmentBounds out;
    if (dx == 0.0) {
        for (int j = 0; j < m; ++j)
            out.lower += std::abs(heights[static_cast<std::size_t>(j) + 1] - heights[static_cast<std::size_t>(j)]);
        out.upper = out.lower;
        return out;
    }
    const auto slope = [&](int j) {
        return (heights[static_cast<std::size_t>(j) + 1] - heights[static_cast<std::size_t>(j)]) / dx;
    };
    const double L = std::max(lipschitz, 0.0);
    for (int j = 0; j < m; ++j) {
        const double c = slope(j);
        out.lower += dx * std::sqrt(1.0 + c * c);
        const bool has_left = j > 0;
        const bool has_right = j + 1 < m;
        double bound;
        if (has_left && has_right) {
            bound = tangent_triangle(dx, c, slope(j - 1), slope(j + 1));
        } else if (has_left) {
            const double s1 = slope(j - 1);
            bound = tangent_triangle(dx, c, s1, s1 <= c ? std::max(L, c) : std::min(-L, c));
        } else if (has_right) {
            const double s2 = slope(j + 1);
            bound = tangent_triangle(dx, c, c <= s2 ? std::min(-L, c) : std::max(L, c), s2);
        } else {
            bound = std::max(tangent_triangle(dx, c, std::min(-L, c), std::max(L, c)),
                             tangent_triangle(dx, c, std::max(L, c), std::min(-L, c)));
        }
        out.upper += std::max(bound, dx * std::sqrt(1.0 + c * c));
    }
    return out;
}

} // namespace detail

/// Chordal length of the lifted segment over m equal parameter intervals; a lower bound on the
/// lifted arclength, non-decreasing under refinement.
inline double segment_lift_length(const GraphSurface& surface, const Point& p, const Point& q, int m) {
    if (m < 1) throw DomainError("segment_lift_length: m must be >= 1");
    const double fp = surface.height(p);
    const double fq = surface.height(q);
    Point scratch(p.size());
    return detail::chord_sum(surface.function(), p, fp, q, fq, m, scratch);
}

/// Sum of segment_lift_length over consecutive breakpoints, m intervals per segment.
inline double path_lift_length(const GraphSurface& surface, const PolygonalPath& path, int m) {
    if (m < 1) throw DomainError("path_lift_length: m must be >= 1");
    std::vector<double> heights(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) heights[i] = surface.height(path[i]);
    Point scratch(path.dimension());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        total += detail::chord_sum(surface.function(), path[i], heights[i], path[i + 1], heights[i + 1], m, scratch);
    return total;
}

/// Chordal lower bound and tangent-triangle upper bound on the lifted length of a path with m
/// intervals per segment. The upper bound is certified when f is convex or concave along each
/// segment and the surface's Lipschitz bound holds.
struct LengthBounds {
    double lower = 0.0;
    double upper = 0.0;
};

inline LengthBounds path_lift_length_bounds(const GraphSurface& surface, const PolygonalPath& path, int m) {
    if (m < 1) throw DomainError("path_lift_length_bounds: m must be >= 1");
    std::vector<double> heights(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) heights[i] = surface.height(path[i]);
    Point scratch(path.dimension());
    std::vector<double> buffer;
    LengthBounds total;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto b = detail::segment_bounds(surface.function(), path[i], heights[i], path[i + 1], heights[i + 1], m,
                                              surface.lipschitz_bound(), scratch, buffer);
        total.lower += b.lower;
        total.upper += b.upper;
    }
    return total;
}

inline LengthBounds segment_lift_length_bounds(const GraphSurface& surface, const Point& p, const Point& q, int m) {
    return path_lift_length_bounds(surface, PolygonalPath(p, q), m);
}

struct ConvergedLength {
    double value = 0.0;
    int m = 1;
    bool converged = false;
};

/// Doubles m until the relative change drops below tol (or m reaches m_cap).
inline ConvergedLength path_lift_length_converged(const GraphSurface& surface, const PolygonalPath& path,
                                                  double tol = 1e-8, int m_initial = 1, int m_cap = 1 << 20) {
    ConvergedLength out;
    out.m = std::max(1, m_initial);
    out.value = path_lift_length(surface, path, out.m);
    while (out.m < m_cap) {
        const double refined = path_lift_length(surface, path, 2 * out.m);
        const double change = std::abs(refined - out.value);
        out.m *= 2;
        out.value = refined;
        if (change <= tol * std::max(refined, 1e-300)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

inline ConvergedLength segment_lift_length_converged(const GraphSurface& surface, const Point& p, const Point& q,
                                                     double tol = 1e-8, int m_initial = 1, int m_cap = 1 << 20) {
    return path_lift_length_converged(surface, PolygonalPath(p, q), tol, m_initial, m_cap);
}

} // namespace alexcurv
