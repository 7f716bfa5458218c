#pragma once

#include "parallel.hpp"
#include "random.hpp"
#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace alexcurv {

struct DistanceOptions {
    int k_max = 32;         ///< maximum number of breakpoints of the witness
    int m = 256;            ///< chords along the whole witness; each of the k-1 segments gets m/(k-1)
    double tol = 1e-4;      ///< relative change accepted across one k level and one m doubling
    int multistart = 8;     ///< straight segment plus multistart-1 jittered seeds
    std::uint64_t rng_seed = 0;
    int max_sweeps = 400;   ///< optimiser sweeps per breakpoint level
};

/// Estimate of the induced length distance between two base points.
struct DistanceEstimate {
    double value = 0.0;
    double lower_bound = 0.0; ///< ambient chord |f^(a) - f^(b)|
    double upper_bound = 0.0; ///< length bound of the lifted witness
    PolygonalPath witness{Point::Zero(1), Point::Zero(1)};
    int breakpoints = 2;
    int subdivision = 1; ///< chords per witness segment
    bool converged = false;

    double gap() const noexcept { return upper_bound - lower_bound; }
};

namespace detail {

/// Block coordinate descent on the interior breakpoints of a lifted polygonal path. Each
/// breakpoint is moved by a compass line search along the coordinate axes; only strict
/// decreases of the length bound are accepted, so it never increases. The objective is the
/// tangent-triangle upper bound: minimising the chordal lower bound instead lets the search
/// hide kinks between samples.
class PathOptimizer {
  public:
    PathOptimizer(const GraphSurface& surface, std::vector<Point> points, int m_per_segment)
        : surface_(surface), points_(std::move(points)), scratch_(surface.dimension()) {
        heights_.resize(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) heights_[i] = surface_.height(points_[i]);
        set_subdivision(m_per_segment);
    }

    void set_subdivision(int m_per_segment) {
        m_ = std::max(1, m_per_segment);
        segments_.resize(points_.size() - 1);
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) segments_[i] = segment(i, points_[i + 1], heights_[i + 1]);
    }

    /// Inserts the midpoint of every segment and sets the new per-segment subdivision.
    void subdivide(int m_per_segment) {
        std::vector<Point> points;
        std::vector<double> heights;
        points.reserve(2 * points_.size() - 1);
        heights.reserve(2 * points_.size() - 1);
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            points.push_back(points_[i]);
            heights.push_back(heights_[i]);
            Point mid = 0.5 * (points_[i] + points_[i + 1]);
            heights.push_back(surface_.height(mid));
            points.push_back(std::move(mid));
        }
        points.push_back(points_.back());
        heights.push_back(heights_.back());
        points_ = std::move(points);
        heights_ = std::move(heights);
        set_subdivision(m_per_segment);
    }

    double length() const {
        double total = 0.0;
        for (double s : segments_) total += s;
        return total;
    }

    /// Length of the current path with a different per-segment subdivision.
    double length_at(int m_per_segment) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i)
            total += bound(points_[i], heights_[i], points_[i + 1], heights_[i + 1], m_per_segment);
        return total;
    }

    /// Runs sweeps until every step falls below min_step or max_sweeps is reached.
    void optimize(int max_sweeps, double min_step) {
        const std::size_t count = points_.size();
        if (count < 3) return;
        std::vector<double> steps(count, 0.0);
        for (std::size_t i = 1; i + 1 < count; ++i) {
            const double local = std::min((points_[i] - points_[i - 1]).norm(), (points_[i + 1] - points_[i]).norm());
            steps[i] = std::max(0.25 * local, 4.0 * min_step);
        }
        const Eigen::Index n = surface_.dimension();
        Point candidate(n);
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double largest = 0.0;
            for (std::size_t i = 1; i + 1 < count; ++i) {
                if (steps[i] < min_step) continue;
                bool improved = false;
                for (Eigen::Index d = 0; d < n; ++d) {
                    for (double sign : {1.0, -1.0}) {
                        candidate = points_[i];
                        candidate[d] += sign * steps[i];
                        candidate = surface_.domain().project(candidate);
                        if (candidate == points_[i]) continue;
                        const double h = evaluate(surface_.function(), candidate);
                        const double before = segments_[i - 1] + segments_[i];
                        const double left = bound(points_[i - 1], heights_[i - 1], candidate, h, m_);
                        const double right = bound(candidate, h, points_[i + 1], heights_[i + 1], m_);
                        if (left + right < before * (1.0 - 1e-15)) {
                            points_[i] = candidate;
                            heights_[i] = h;
                            segments_[i - 1] = left;
                            segments_[i] = right;
                            improved = true;
                            break;
                        }
                    }
                }
                steps[i] *= improved ? 1.5 : 0.5;
                largest = std::max(largest, steps[i]);
            }
            if (largest < min_step) break;
        }
    }

    PolygonalPath path() const { return PolygonalPath(points_); }
    std::size_t breakpoints() const noexcept { return points_.size(); }
    int subdivision() const noexcept { return m_; }

  private:
    double segment(std::size_t i, const Point& q, double fq) { return bound(points_[i], heights_[i], q, fq, m_); }

    double bound(const Point& p, double fp, const Point& q, double fq, int m) {
        return segment_bounds(surface_.function(), p, fp, q, fq, m, surface_.lipschitz_bound(), scratch_, buffer_)
            .upper;
    }

    const GraphSurface& surface_;
    std::vector<Point> points_;
    std::vector<double> heights_;
    std::vector<double> segments_;
    Point scratch_;
    std::vector<double> buffer_;
    int m_ = 1;
};

struct StartResult {
    double upper = std::numeric_limits<double>::infinity();
    std::vector<Point> witness;
    int subdivision = 1;
    bool converged = false;
};

inline double relative_change(double before, double after) {
    return std::abs(before - after) / std::max(std::abs(after), 1e-300);
}

inline StartResult run_ladder(const GraphSurface& surface, std::vector<Point> start, const DistanceOptions& opts,
                              double min_step) {
    const auto per_segment = [&](std::size_t breakpoints) {
        return std::max(1, opts.m / static_cast<int>(breakpoints - 1));
    };
    const int initial_subdivision = per_segment(start.size());
    PathOptimizer optimizer(surface, std::move(start), initial_subdivision);
    optimizer.optimize(opts.max_sweeps, min_step);

    StartResult best;
    best.upper = optimizer.length();
    best.witness = optimizer.path().breakpoints();
    best.subdivision = optimizer.subdivision();
    const auto m_check = [&] {
        return relative_change(optimizer.length(), optimizer.length_at(2 * optimizer.subdivision())) < opts.tol;
    };
    if (2 * optimizer.breakpoints() - 1 > static_cast<std::size_t>(opts.k_max)) {
        best.converged = m_check();
        return best;
    }
    while (2 * optimizer.breakpoints() - 1 <= static_cast<std::size_t>(opts.k_max)) {
        const double previous = best.upper;
        optimizer.subdivide(per_segment(2 * optimizer.breakpoints() - 1));
        optimizer.optimize(opts.max_sweeps, min_step);
        const double current = optimizer.length();
        const bool k_stable = relative_change(previous, current) < opts.tol;
        if (current <= best.upper) {
            best.upper = current;
            best.witness = optimizer.path().breakpoints();
            best.subdivision = optimizer.subdivision();
        }
        if (k_stable && m_check()) {
            best.converged = true;
            break;
        }
    }
    return best;
}

} // namespace detail

/// Induced length distance between base points a and b, estimated by optimising polygonal
/// paths over a ladder of breakpoint counts 2, 3, 5, 9, ... <= k_max, warm-started from the
/// previous level. The straight segment is always the first seed, so the upper bound never
/// exceeds the lifted length of the segment a -> b.
inline DistanceEstimate intrinsic_distance(const GraphSurface& surface, const Point& a, const Point& b,
                                           const DistanceOptions& opts = {}) {
    if (opts.k_max < 2) throw DomainError("intrinsic_distance: k_max must be >= 2");
    if (!(opts.tol > 0.0)) throw DomainError("intrinsic_distance: tol must be positive");
    if (opts.m < 1) throw DomainError("intrinsic_distance: m must be >= 1");
    if (opts.multistart < 1) throw DomainError("intrinsic_distance: multistart must be >= 1");

    // Canonical endpoint order makes the estimate exactly symmetric.
    const bool swap = std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(), a.data() + a.size());
    const Point& from = swap ? b : a;
    const Point& to = swap ? a : b;
    const LiftedPoint lifted_from = lift(surface, from);
    const LiftedPoint lifted_to = lift(surface, to);
    const double chord = ambient_distance(lifted_from, lifted_to);
    const double separation = (to - from).norm();

    if (separation == 0.0) {
        DistanceEstimate zero{0.0, 0.0, 0.0, PolygonalPath(a, b), 2, 1, true};
        return zero;
    }

    const double min_step = 1e-7 * separation;
    detail::StartResult best;
    for (int s = 0; s < opts.multistart; ++s) {
        std::vector<Point> seed{from, to};
        if (s > 0) {
            if (opts.k_max < 3) break;
            Rng rng(derive_seed(opts.rng_seed, static_cast<std::uint64_t>(s)));
            Point mid = 0.5 * (from + to) + gaussian_point(rng, from.size(), 0.1 * separation);
            seed = {from, surface.domain().project(mid), to};
        }
        auto result = detail::run_ladder(surface, std::move(seed), opts, min_step);
        if (result.upper < best.upper) best = std::move(result);
    }

    std::vector<Point> witness = std::move(best.witness);
    if (swap) std::reverse(witness.begin(), witness.end());
    DistanceEstimate est{};
    est.lower_bound = chord;
    est.upper_bound = std::max(best.upper, chord);
    est.value = est.upper_bound;
    est.breakpoints = static_cast<int>(witness.size());
    est.witness = PolygonalPath(std::move(witness));
    est.subdivision = best.subdivision;
    est.converged = best.converged;
    return est;
}

/// Local search on the interior breakpoints with m intervals per segment; endpoints stay fixed
/// and the length bound never increases.
inline PolygonalPath refine_path(const GraphSurface& surface, const PolygonalPath& path, int m, int iterations) {
    if (m < 1) throw DomainError("refine_path: m must be >= 1");
    for (const auto& p : path.breakpoints()) (void)surface.height(p);
    const double scale = std::max((path.back() - path.front()).norm(), 1e-12 * surface.domain().radius());
    detail::PathOptimizer optimizer(surface, path.breakpoints(), m);
    optimizer.optimize(std::max(0, iterations), 1e-9 * scale);
    return optimizer.path();
}

/// Symmetric matrix of distance estimates, entry (i, j) seeded by derive_seed(seed, i, j).
class DistanceMatrix {
  public:
    DistanceMatrix(std::size_t size, std::vector<DistanceEstimate> entries)
        : size_(size), entries_(std::move(entries)) {}

    std::size_t size() const noexcept { return size_; }
    const DistanceEstimate& operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }
    double value(std::size_t i, std::size_t j) const { return (*this)(i, j).value; }

  private:
    std::size_t size_;
    std::vector<DistanceEstimate> entries_;
};

inline DistanceOptions pair_options(const DistanceOptions& opts, std::size_t i, std::size_t j) {
    DistanceOptions pair = opts;
    pair.rng_seed = derive_seed(opts.rng_seed, i, j);
    return pair;
}

inline DistanceMatrix distance_matrix(const GraphSurface& surface, const std::vector<Point>& points,
                                      const DistanceOptions& opts = {}, int jobs = 1) {
    const std::size_t n = points.size();
    if (n < 2) throw DomainError("distance_matrix: at least two points are required");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<DistanceEstimate> upper(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t idx) {
        const auto [i, j] = pairs[idx];
        upper[idx] = intrinsic_distance(surface, points[i], points[j], pair_options(opts, i, j));
    });
    std::vector<DistanceEstimate> entries(n * n);
    for (std::size_t i = 0; i < n; ++i)
        entries[i * n + i] = DistanceEstimate{0.0, 0.0, 0.0, PolygonalPath(points[i], points[i]), 2, 1, true};
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto [i, j] = pairs[idx];
        entries[i * n + j] = upper[idx];
        DistanceEstimate mirrored = upper[idx];
        mirrored.witness = upper[idx].witness.reversed();
        entries[j * n + i] = std::move(mirrored);
    }
    return DistanceMatrix(n, std::move(entries));
}

} // namespace alexcurv
