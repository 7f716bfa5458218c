#pragma once

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace alexcurv {

/// A point of R^n. Coordinates must be finite wherever a Point enters the library.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool is_finite(const Point& x) { return x.size() > 0 && x.allFinite(); }

inline void require_point(const Point& x, const char* what) {
    if (!is_finite(x)) {
        throw DomainError(std::string(what) + ": point must be non-empty with finite coordinates");
    }
}

inline void require_dimension(const Point& x, Eigen::Index n, const char* what) {
    require_point(x, what);
    if (x.size() != n) {
        throw DomainError(std::string(what) + ": dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(n));
    }
}

inline Point make_point(std::initializer_list<double> coords) {
    Point p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p[i++] = c;
    return p;
}

/// Closed Euclidean ball, optionally intersected with an axis-aligned box.
class Region {
  public:
    Region(Point center, double radius) : center_(std::move(center)), radius_(radius) {
        require_point(center_, "Region center");
        if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw DomainError("Region radius must be positive and finite");
    }

    Region(Point center, double radius, Point box_lo, Point box_hi) : Region(std::move(center), radius) {
        require_dimension(box_lo, center_.size(), "Region box_lo");
        require_dimension(box_hi, center_.size(), "Region box_hi");
        if ((box_lo.array() > box_hi.array()).any()) throw DomainError("Region box bounds are inverted");
        box_ = std::make_pair(std::move(box_lo), std::move(box_hi));
    }

    static Region ball(Eigen::Index dimension, double radius) { return Region(Point::Zero(dimension), radius); }

    const Point& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    Eigen::Index dimension() const noexcept { return center_.size(); }
    const std::optional<std::pair<Point, Point>>& box() const noexcept { return box_; }

    /// Membership with a relative slack of 1e-12 on the radius.
    bool contains(const Point& x) const {
        if (x.size() != center_.size() || !x.allFinite()) return false;
        if ((x - center_).norm() > radius_ * (1.0 + 1e-12)) return false;
        if (box_) {
            const double slack = 1e-12 * radius_;
            if ((x.array() < box_->first.array() - slack).any()) return false;
            if ((x.array() > box_->second.array() + slack).any()) return false;
        }
        return true;
    }

    /// Radial projection onto the ball followed by clamping to the box.
    Point project(const Point& x) const {
        Point y = x;
        const Point offset = y - center_;
        const double r = offset.norm();
        if (r > radius_) y = center_ + offset * (radius_ / r);
        if (box_) y = y.cwiseMax(box_->first).cwiseMin(box_->second);
        return y;
    }

    bool contains_ball(const Point& x, double r) const {
        return x.size() == center_.size() && (x - center_).norm() + r <= radius_ * (1.0 + 1e-12);
    }

  private:
    Point center_;
    double radius_;
    std::optional<std::pair<Point, Point>> box_;
};

/// Concatenation of constant-speed segments p_1 -> p_2 -> ... -> p_k, each traversed on a
/// parameter interval of length 1/(k-1).
class PolygonalPath {
  public:
    explicit PolygonalPath(std::vector<Point> breakpoints) : points_(std::move(breakpoints)) {
        if (points_.size() < 2) throw DomainError("PolygonalPath needs at least two breakpoints");
        const Eigen::Index n = points_.front().size();
        for (const auto& p : points_) require_dimension(p, n, "PolygonalPath breakpoint");
    }

    PolygonalPath(const Point& a, const Point& b) : PolygonalPath(std::vector<Point>{a, b}) {}

    std::size_t size() const noexcept { return points_.size(); }
    Eigen::Index dimension() const noexcept { return points_.front().size(); }
    const Point& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Point>& breakpoints() const noexcept { return points_; }
    const Point& front() const { return points_.front(); }
    const Point& back() const { return points_.back(); }

    PolygonalPath reversed() const {
        std::vector<Point> r(points_.rbegin(), points_.rend());
        return PolygonalPath(std::move(r));
    }

    /// Base-space (unlifted) length.
    double base_length() const {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) total += (points_[i + 1] - points_[i]).norm();
        return total;
    }

    double max_segment_length() const {
        double longest = 0.0;
        for (std::size_t i = 0; i + 1 < points_.size(); ++i)
            longest = std::max(longest, (points_[i + 1] - points_[i]).norm());
        return longest;
    }

    /// Same geometric path with the midpoint of every segment inserted.
    PolygonalPath subdivided() const {
        std::vector<Point> out;
        out.reserve(2 * points_.size() - 1);
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            out.push_back(points_[i]);
            out.push_back(0.5 * (points_[i] + points_[i + 1]));
        }
        out.push_back(points_.back());
        return PolygonalPath(std::move(out));
    }

  private:
    std::vector<Point> points_;
};

/// sigma_pq(t) = (1 - t) p + t q.
inline Point linear_path(const Point& p, const Point& q, double t) { return (1.0 - t) * p + t * q; }

inline Point polygonal_path_eval(const PolygonalPath& path, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("polygonal_path_eval: t must lie in [0, 1]");
    const std::size_t segments = path.size() - 1;
    const double scaled = t * static_cast<double>(segments);
    std::size_t i = std::min(static_cast<std::size_t>(std::floor(scaled)), segments - 1);
    return linear_path(path[i], path[i + 1], scaled - static_cast<double>(i));
}

/// A point (x, f(x)) of a graph in R^n x R.
struct LiftedPoint {
    Point base;
    double height = 0.0;

    Point ambient() const {
        Point out(base.size() + 1);
        out << base, height;
        return out;
    }
};

inline double ambient_distance(const LiftedPoint& a, const LiftedPoint& b) {
    const double dh = a.height - b.height;
    return std::sqrt((a.base - b.base).squaredNorm() + dh * dh);
}

} // namespace alexcurv
