#pragma once

#include "function_spec.hpp"
#include "random.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace alexcurv {

inline double evaluate(const FunctionSpec& spec, const Point& x);
inline Point subgradient(const FunctionSpec& spec, const Point& x);
inline std::optional<Region> domain(const FunctionSpec& spec);

// =============================================================================================
// Bodies and boundary charts
// =============================================================================================

namespace detail {

inline double constraint_value(const Constraint& constraint, const Point& x) {
    return std::visit(
        [&](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Halfspace>) {
                return c.normal.dot(x) - c.offset;
            } else if constexpr (std::is_same_v<T, BallConstraint>) {
                return (x - c.center).norm() - c.radius;
            } else {
                return evaluate(*c.function, x) - c.level;
            }
        },
        constraint);
}

} // namespace detail

inline ConvexBody::ConvexBody(Eigen::Index dimension, std::vector<Constraint> constraints, Point interior_point)
    : dimension_(dimension), constraints_(std::move(constraints)), interior_(std::move(interior_point)) {
    if (dimension_ < 1) throw DomainError("ConvexBody: dimension must be positive");
    if (constraints_.empty()) throw DomainError("ConvexBody: at least one constraint is required");
    for (auto& constraint : constraints_) {
        std::visit(
            [&](auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, Halfspace>) {
                    require_dimension(c.normal, dimension_, "halfspace normal");
                    const double len = c.normal.norm();
                    if (!(len > 0.0)) throw DomainError("halfspace normal must be non-zero");
                    // Stored normalised so that constraint values are signed distances.
                    c.normal /= len;
                    c.offset /= len;
                } else if constexpr (std::is_same_v<T, BallConstraint>) {
                    require_dimension(c.center, dimension_, "ball center");
                    if (!(c.radius > 0.0)) throw DomainError("ball radius must be positive");
                } else {
                    if (!c.function || c.function->dimension() != dimension_)
                        throw DomainError("sublevel function dimension mismatch");
                }
            },
            constraint);
    }
    require_dimension(interior_, dimension_, "ConvexBody interior point");
    if (!(violation(interior_) < 0.0))
        throw PreconditionError("ConvexBody: interior point does not have strict constraint slack");
}

inline double ConvexBody::violation(const Point& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : constraints_) worst = std::max(worst, detail::constraint_value(c, x));
    return worst;
}

inline std::optional<double> ConvexBody::diameter_bound() const {
    std::optional<double> bound;
    for (const auto& c : constraints_) {
        if (const auto* ball = std::get_if<BallConstraint>(&c)) {
            const double d = 2.0 * ball->radius;
            bound = bound ? std::min(*bound, d) : d;
        }
    }
    return bound;
}

inline LowerBoundaryChart::LowerBoundaryChart(ConvexBody body, Point base_point, Point interior_point,
                                              double chart_radius, double bisection_tol)
    : body_(std::move(body)), x0_(std::move(base_point)), y_(std::move(interior_point)), radius_(chart_radius),
      tol_(bisection_tol) {
    const Eigen::Index n = body_.dimension();
    if (n < 2) throw DomainError("boundary chart: body dimension must be at least 2");
    require_dimension(x0_, n, "boundary chart base point");
    require_dimension(y_, n, "boundary chart interior point");
    if (!(radius_ > 0.0)) throw DomainError("boundary chart: chart_radius must be positive");
    if (!(tol_ > 0.0)) throw DomainError("boundary chart: bisection_tol must be positive");
    if (!(body_.violation(y_) < 0.0)) throw PreconditionError("boundary chart: y is not an interior point");
    if (!body_.on_boundary(x0_)) throw PreconditionError("boundary chart: x0 is not on the body boundary");

    inside_offset_ = (y_ - x0_).norm();
    up_ = (y_ - x0_) / inside_offset_;

    basis_.resize(n, n - 1);
    Eigen::Index filled = 0;
    for (Eigen::Index i = 0; i < n && filled < n - 1; ++i) {
        Point v = Point::Unit(n, i);
        for (int pass = 0; pass < 2; ++pass) {
            v -= up_.dot(v) * up_;
            for (Eigen::Index j = 0; j < filled; ++j) v -= basis_.col(j).dot(v) * basis_.col(j);
        }
        const double len = v.norm();
        if (len > 1e-8) basis_.col(filled++) = v / len;
    }

    const auto diameter = body_.diameter_bound();
    descent_bound_ = diameter ? *diameter + inside_offset_ : 2.0 * inside_offset_;

    // Probe the chart rim along each hyperplane axis.
    for (Eigen::Index j = 0; j < n - 1; ++j) {
        for (double sign : {-1.0, 1.0}) {
            const Point rim = sign * radius_ * Point::Unit(n - 1, j);
            if (!(body_.violation(ambient(rim, inside_offset_)) < 0.0))
                throw ChartRadiusError("boundary chart: chart_radius too large, line misses the body interior");
        }
    }
}

inline double LowerBoundaryChart::height(const Point& x) const {
    if (x.size() != basis_.cols()) throw DomainError("boundary chart: coordinate dimension mismatch");
    if (x.norm() > radius_ * (1.0 + 1e-12)) throw DomainError("boundary chart: coordinate outside chart radius");
    const Point foot = x0_ + basis_ * x;
    Point probe = foot + inside_offset_ * up_;
    double inside = inside_offset_;
    if (!(body_.violation(probe) <= 0.0))
        throw ChartRadiusError("boundary chart: line through chart coordinate misses the body");
    double outside = inside - descent_bound_;
    for (int doubling = 0;; ++doubling) {
        probe = foot + outside * up_;
        if (!(body_.violation(probe) <= 0.0)) break;
        if (doubling > 60) throw EvaluationError("boundary chart: body is unbounded below along the chart line");
        outside = inside - 2.0 * (inside - outside);
    }
    while (inside - outside > tol_) {
        const double mid = 0.5 * (inside + outside);
        probe = foot + mid * up_;
        if (body_.violation(probe) <= 0.0)
            inside = mid;
        else
            outside = mid;
    }
    return 0.5 * (inside + outside);
}

/// Chart of the body boundary near x0, with y giving the upward direction.
inline FunctionSpec lower_boundary_function(const ConvexBody& body, const Point& x0, const Point& y,
                                            double chart_radius, double bisection_tol = 1e-8) {
    auto chart = std::make_shared<const LowerBoundaryChart>(body, x0, y, chart_radius, bisection_tol);
    return FunctionSpec::boundary_chart(std::move(chart));
}

// =============================================================================================
// Evaluation
// =============================================================================================

namespace detail {

inline double eval_quadratic(const QuadraticForm& q, const Point& x) {
    const Eigen::Index n = x.size();
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double row = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) row += q.A(i, j) * x[i];
        s += row * x[j];
    }
    return 0.5 * s + q.b.dot(x) + q.c;
}

inline double eval_max_affine(const MaxAffine& f, const Point& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& piece : f.pieces) best = std::max(best, piece.a.dot(x) + piece.b);
    return best;
}

inline double eval_log_sum_exp(const LogSumExp& f, const Point& x) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& piece : f.pieces) top = std::max(top, (piece.a.dot(x) + piece.b) / f.temperature);
    double sum = 0.0;
    for (const auto& piece : f.pieces) sum += std::exp((piece.a.dot(x) + piece.b) / f.temperature - top);
    return f.temperature * (top + std::log(sum));
}

inline double eval_mollified(const Mollified& f, const Point& x) {
    if (auto inner_domain = domain(*f.inner)) {
        if (!inner_domain->contains_ball(x, f.params.delta))
            throw DomainErosionError("mollified: evaluation point within delta of the inner domain boundary");
    }
    const auto& rule = *f.rule;
    double sum = 0.0;
    Point shifted(x.size());
    for (std::size_t j = 0; j < rule.weights.size(); ++j) {
        shifted = x - rule.offsets[j];
        sum += rule.weights[j] * evaluate(*f.inner, shifted);
    }
    return sum;
}

/// Half-width of the z window (outer inf) and the y window (inner sup).
inline double infsup_outer_window(const InfSupParams& p) { return p.epsilon * std::max(1.0, p.lipschitz); }
inline double infsup_inner_window(const InfSupParams& p) { return 1.5 * p.epsilon * std::max(1.0, p.lipschitz); }

/// Maximises (or minimises, sign = -1) objective over the box center +- half_width with a grid
/// followed by cyclic Brent polish. Throws when the grid optimum sits on the window boundary.
template <typename Objective>
double grid_then_polish(const Point& center, double half_width, int grid_points, int polish_iterations,
                        double sign, Objective&& objective, const char* what) {
    const Eigen::Index n = center.size();
    const int g = std::max(3, grid_points);
    const double spacing = 2.0 * half_width / static_cast<double>(g - 1);
    std::vector<int> index(static_cast<std::size_t>(n), 0);
    Point node(n);
    Point best = center;
    double best_value = -std::numeric_limits<double>::infinity();
    bool best_on_edge = false;
    for (;;) {
        bool on_edge = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            node[i] = center[i] - half_width + spacing * index[static_cast<std::size_t>(i)];
            on_edge = on_edge || index[static_cast<std::size_t>(i)] == 0 || index[static_cast<std::size_t>(i)] == g - 1;
        }
        const double v = sign * objective(node);
        if (v > best_value) {
            best_value = v;
            best = node;
            best_on_edge = on_edge;
        }
        Eigen::Index axis = 0;
        while (axis < n && ++index[static_cast<std::size_t>(axis)] == g) index[static_cast<std::size_t>(axis++)] = 0;
        if (axis == n) break;
    }
    if (best_on_edge) throw UnreliableEvaluationError(std::string(what) + ": optimum on the search window boundary");

    const int passes = n == 1 ? 1 : 4;
    Point probe = best;
    for (int pass = 0; pass < passes; ++pass) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lo = best[i] - spacing;
            const double hi = best[i] + spacing;
            std::uintmax_t iterations = static_cast<std::uintmax_t>(std::max(1, polish_iterations));
            const auto line = [&](double t) {
                probe[i] = t;
                return -sign * objective(probe);
            };
            const auto [arg, value] =
                boost::math::tools::brent_find_minima(line, lo, hi, std::numeric_limits<double>::digits / 2, iterations);
            if (-value > best_value) {
                best_value = -value;
                best[i] = arg;
            }
            probe[i] = best[i];
        }
    }
    return sign * best_value;
}

inline double eval_inf_sup(const InfSup& g, const Point& x) {
    const auto& p = g.params;
    const double eps = p.epsilon;
    const auto inner_sup = [&](const Point& z) {
        return grid_then_polish(
            z, infsup_inner_window(p), p.grid_points, p.polish_iterations, 1.0,
            [&](const Point& y) { return evaluate(*g.inner, y) - (y - z).squaredNorm() / (2.0 * eps); },
            "inf_sup inner sup");
    };
    return grid_then_polish(
        x, infsup_outer_window(p), p.grid_points, p.polish_iterations, -1.0,
        [&](const Point& z) { return inner_sup(z) + (x - z).squaredNorm() / eps; }, "inf_sup outer inf");
}

inline double eval_restricted(const Restricted& r, const Point& c) { return evaluate(*r.inner, r.base + r.basis * c); }

} // namespace detail

inline std::optional<Region> domain(const FunctionSpec& spec) {
    return std::visit(
        [&](const auto& f) -> std::optional<Region> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, BoundaryChart>) {
                return Region::ball(spec.dimension(), f.chart->chart_radius());
            } else if constexpr (std::is_same_v<T, Mollified>) {
                auto inner = domain(*f.inner);
                if (!inner) return std::nullopt;
                return Region(inner->center(), inner->radius() - f.params.delta);
            } else if constexpr (std::is_same_v<T, InfSup>) {
                const auto& search = *f.params.search_domain;
                const double margin = (detail::infsup_outer_window(f.params) + detail::infsup_inner_window(f.params)) *
                                      std::sqrt(static_cast<double>(spec.dimension()));
                return Region(search.center(), search.radius() - margin);
            } else if constexpr (std::is_same_v<T, Restricted>) {
                auto inner = domain(*f.inner);
                if (!inner) return std::nullopt;
                const Point rel = inner->center() - f.base;
                const Point coords = f.basis.transpose() * rel;
                const double off_span2 = (rel - f.basis * coords).squaredNorm();
                const double r2 = inner->radius() * inner->radius() - off_span2;
                if (!(r2 > 0.0)) throw DomainError("restricted: affine span misses the inner domain");
                return Region(coords, std::sqrt(r2));
            } else {
                return std::nullopt;
            }
        },
        spec.family());
}

inline double evaluate(const FunctionSpec& spec, const Point& x) {
    require_dimension(x, spec.dimension(), "evaluate");
    const double value = std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm>) {
                return detail::eval_quadratic(f, x);
            } else if constexpr (std::is_same_v<T, MaxAffine>) {
                return detail::eval_max_affine(f, x);
            } else if constexpr (std::is_same_v<T, NormScaled>) {
                return f.alpha * x.norm();
            } else if constexpr (std::is_same_v<T, LogSumExp>) {
                return detail::eval_log_sum_exp(f, x);
            } else if constexpr (std::is_same_v<T, BoundaryChart>) {
                return f.chart->height(x);
            } else if constexpr (std::is_same_v<T, Mollified>) {
                return detail::eval_mollified(f, x);
            } else if constexpr (std::is_same_v<T, InfSup>) {
                if (auto d = domain(spec); !d->contains(x))
                    throw DomainError("inf_sup: evaluation point lacks search margin inside the search domain");
                return detail::eval_inf_sup(f, x);
            } else {
                return detail::eval_restricted(f, x);
            }
        },
        spec.family());
    if (!std::isfinite(value)) throw EvaluationError("evaluate: non-finite value");
    return value;
}

// =============================================================================================
// Classification
// =============================================================================================

/// True when the spec is known not to be convex (indefinite quadratic anywhere in the tree).
inline bool known_nonconvex(const FunctionSpec& spec) {
    return std::visit(
        [](const auto& f) -> bool {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm>) {
                return !f.convex;
            } else if constexpr (std::is_same_v<T, Mollified> || std::is_same_v<T, InfSup> ||
                                 std::is_same_v<T, Restricted>) {
                return known_nonconvex(*f.inner);
            } else {
                return false;
            }
        },
        spec.family());
}

/// True when the function has a Lipschitz gradient (quadratic, log-sum-exp, smoothed families, affine).
inline bool is_c11(const FunctionSpec& spec) {
    return std::visit(
        [](const auto& f) -> bool {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm> || std::is_same_v<T, LogSumExp> ||
                          std::is_same_v<T, Mollified> || std::is_same_v<T, InfSup>) {
                return true;
            } else if constexpr (std::is_same_v<T, MaxAffine>) {
                return f.pieces.size() == 1;
            } else if constexpr (std::is_same_v<T, NormScaled>) {
                return f.alpha == 0.0;
            } else if constexpr (std::is_same_v<T, Restricted>) {
                return is_c11(*f.inner);
            } else {
                return false;
            }
        },
        spec.family());
}

// =============================================================================================
// Subgradients
// =============================================================================================

namespace detail {

/// Minimal-norm point of the convex hull of `vectors`.
inline Point min_norm_in_hull(const std::vector<Point>& vectors) {
    const std::size_t count = vectors.size();
    const Eigen::Index n = vectors.front().size();
    if (count == 1) return vectors.front();
    Point best;
    double best_norm = std::numeric_limits<double>::infinity();
    if (count <= 12) {
        const std::size_t max_size = std::min<std::size_t>(count, static_cast<std::size_t>(n) + 1);
        for (std::uint32_t mask = 1; mask < (1u << count); ++mask) {
            const auto size = static_cast<std::size_t>(std::popcount(mask));
            if (size > max_size) continue;
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < count; ++i)
                if (mask & (1u << i)) members.push_back(i);
            const auto m = static_cast<Eigen::Index>(size);
            Matrix kkt = Matrix::Zero(m + 1, m + 1);
            Point rhs = Point::Zero(m + 1);
            for (Eigen::Index r = 0; r < m; ++r) {
                for (Eigen::Index c = 0; c < m; ++c)
                    kkt(r, c) = vectors[members[static_cast<std::size_t>(r)]].dot(vectors[members[static_cast<std::size_t>(c)]]);
                kkt(r, m) = 1.0;
                kkt(m, r) = 1.0;
            }
            rhs[m] = 1.0;
            Eigen::FullPivLU<Matrix> lu(kkt);
            if (!lu.isInvertible()) continue;
            const Point sol = lu.solve(rhs);
            if ((sol.head(m).array() < -1e-12).any()) continue;
            Point candidate = Point::Zero(n);
            for (Eigen::Index r = 0; r < m; ++r) candidate += std::max(0.0, sol[r]) * vectors[members[static_cast<std::size_t>(r)]];
            const double norm = candidate.norm();
            if (norm < best_norm - 1e-15) {
                best_norm = norm;
                best = candidate;
            }
        }
        if (best.size() == n) return best;
    }
    // Projected gradient on the simplex.
    Point lambda = Point::Constant(static_cast<Eigen::Index>(count), 1.0 / static_cast<double>(count));
    Matrix V(n, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) V.col(static_cast<Eigen::Index>(i)) = vectors[i];
    const Matrix gram = V.transpose() * V;
    const double step = 1.0 / std::max(1e-300, gram.norm());
    for (int it = 0; it < 20000; ++it) {
        Point trial = lambda - step * (gram * lambda);
        // Euclidean projection onto the simplex.
        std::vector<double> sorted(trial.data(), trial.data() + trial.size());
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double cumulative = 0.0, theta = 0.0;
        for (std::size_t j = 0; j < sorted.size(); ++j) {
            cumulative += sorted[j];
            const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
            if (sorted[j] - t > 0.0) theta = t;
        }
        lambda = (trial.array() - theta).cwiseMax(0.0);
    }
    return V * lambda;
}

/// Central differences, falling back to one-sided steps near the domain boundary.
inline Point finite_difference_gradient(const FunctionSpec& spec, const Point& x, double h) {
    const auto dom = domain(spec);
    const Eigen::Index n = x.size();
    Point grad(n);
    const double fx = evaluate(spec, x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Point plus = x, minus = x;
        plus[i] += h;
        minus[i] -= h;
        const bool has_plus = !dom || dom->contains(plus);
        const bool has_minus = !dom || dom->contains(minus);
        if (has_plus && has_minus)
            grad[i] = (evaluate(spec, plus) - evaluate(spec, minus)) / (2.0 * h);
        else if (has_plus)
            grad[i] = (evaluate(spec, plus) - fx) / h;
        else if (has_minus)
            grad[i] = (fx - evaluate(spec, minus)) / h;
        else
            throw DomainError("subgradient: no finite-difference stencil fits in the domain");
    }
    return grad;
}

} // namespace detail

/// A subgradient of a convex spec; the gradient where differentiable and the minimal-norm
/// subgradient at kinks of max-affine and norm families. Charts and inf-sup convolutions are
/// differentiated numerically.
inline Point subgradient(const FunctionSpec& spec, const Point& x) {
    require_dimension(x, spec.dimension(), "subgradient");
    if (known_nonconvex(spec)) throw UnsupportedOperationError("subgradient: spec is not convex");
    return std::visit(
        [&](const auto& f) -> Point {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm>) {
                return f.A * x + f.b;
            } else if constexpr (std::is_same_v<T, MaxAffine>) {
                const double top = detail::eval_max_affine(f, x);
                const double tol = 1e-12 * std::max(1.0, std::abs(top));
                std::vector<Point> active;
                for (const auto& piece : f.pieces) {
                    if (piece.a.dot(x) + piece.b < top - tol) continue;
                    const bool duplicate = std::any_of(active.begin(), active.end(),
                                                       [&](const Point& a) { return (a - piece.a).norm() == 0.0; });
                    if (!duplicate) active.push_back(piece.a);
                }
                return detail::min_norm_in_hull(active);
            } else if constexpr (std::is_same_v<T, NormScaled>) {
                const double r = x.norm();
                if (r == 0.0) return Point::Zero(x.size());
                return f.alpha * x / r;
            } else if constexpr (std::is_same_v<T, LogSumExp>) {
                double top = -std::numeric_limits<double>::infinity();
                for (const auto& piece : f.pieces) top = std::max(top, (piece.a.dot(x) + piece.b) / f.temperature);
                Point grad = Point::Zero(x.size());
                double total = 0.0;
                for (const auto& piece : f.pieces) {
                    const double w = std::exp((piece.a.dot(x) + piece.b) / f.temperature - top);
                    total += w;
                    grad += w * piece.a;
                }
                return grad / total;
            } else if constexpr (std::is_same_v<T, BoundaryChart>) {
                const double h = std::max(1e-6, std::sqrt(f.chart->bisection_tol())) * std::max(1.0, f.chart->chart_radius());
                return detail::finite_difference_gradient(spec, x, h);
            } else if constexpr (std::is_same_v<T, Mollified>) {
                Point grad = Point::Zero(x.size());
                const auto& rule = *f.rule;
                for (std::size_t j = 0; j < rule.weights.size(); ++j)
                    grad += rule.weights[j] * subgradient(*f.inner, x - rule.offsets[j]);
                return grad;
            } else if constexpr (std::is_same_v<T, InfSup>) {
                return detail::finite_difference_gradient(spec, x, 1e-5 * std::max(1.0, x.norm()));
            } else {
                return f.basis.transpose() * subgradient(*f.inner, f.base + f.basis * x);
            }
        },
        spec.family());
}

// =============================================================================================
// Lipschitz estimation and convexity audit
// =============================================================================================

/// Lipschitz constant known from the family parameters, when the family admits one.
inline std::optional<double> exact_lipschitz_bound(const FunctionSpec& spec, const Region& region) {
    return std::visit(
        [&](const auto& f) -> std::optional<double> {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm>) {
                Eigen::SelfAdjointEigenSolver<Matrix> eig(f.A, Eigen::EigenvaluesOnly);
                const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
                return (f.A * region.center() + f.b).norm() + region.radius() * spectral;
            } else if constexpr (std::is_same_v<T, MaxAffine> || std::is_same_v<T, LogSumExp>) {
                double best = 0.0;
                for (const auto& piece : f.pieces) best = std::max(best, piece.a.norm());
                return best;
            } else if constexpr (std::is_same_v<T, NormScaled>) {
                return f.alpha;
            } else if constexpr (std::is_same_v<T, Mollified>) {
                return exact_lipschitz_bound(*f.inner, Region(region.center(), region.radius() + f.params.delta));
            } else if constexpr (std::is_same_v<T, Restricted>) {
                return exact_lipschitz_bound(*f.inner, Region(f.base + f.basis * region.center(), region.radius()));
            } else {
                return std::nullopt;
            }
        },
        spec.family());
}

/// Max of |f(x) - f(y)| / |x - y| over sampled pairs (half uniform, half short pairs at the
/// region rim), raised to the exact family bound when one is known.
inline double lipschitz_estimate(const FunctionSpec& spec, const Region& region, int samples,
                                 std::uint64_t rng_seed) {
    if (samples < 2) throw DomainError("lipschitz_estimate: samples must be >= 2");
    if (region.dimension() != spec.dimension()) throw DomainError("lipschitz_estimate: region dimension mismatch");
    Rng rng(derive_seed(rng_seed, "lipschitz"));
    const Eigen::Index n = spec.dimension();
    double best = 0.0;
    const auto consider = [&](const Point& x, const Point& y) {
        const double dist = (x - y).norm();
        if (!(dist > 1e-12 * region.radius())) return;
        best = std::max(best, std::abs(evaluate(spec, x) - evaluate(spec, y)) / dist);
    };
    for (int s = 0; s < samples; ++s) {
        if (s % 2 == 0) {
            consider(sample_in_region(rng, region), sample_in_region(rng, region));
        } else {
            const Point x = region.project(region.center() + region.radius() * random_unit_vector(rng, n));
            const double step = region.radius() * std::pow(10.0, -4.0 + 2.0 * uniform01(rng));
            const Point y = region.project(x - step * random_unit_vector(rng, n));
            consider(x, y);
        }
    }
    if (auto exact = exact_lipschitz_bound(spec, region)) best = std::max(best, *exact);
    return best;
}

struct ConvexityReport {
    int samples = 0;
    int violations = 0;
    double worst_gap = -std::numeric_limits<double>::infinity(); ///< max f(mid) - (f(x)+f(y))/2
};

/// Midpoint-convexity audit over sampled pairs.
inline ConvexityReport convexity_check(const FunctionSpec& spec, const Region& region, int samples, double tol,
                                       std::uint64_t rng_seed) {
    if (samples < 1) throw DomainError("convexity_check: samples must be >= 1");
    if (!(tol >= 0.0)) throw DomainError("convexity_check: tol must be >= 0");
    Rng rng(derive_seed(rng_seed, "convexity"));
    ConvexityReport report;
    report.samples = samples;
    for (int s = 0; s < samples; ++s) {
        const Point x = sample_in_region(rng, region);
        const Point y = sample_in_region(rng, region);
        const double gap = evaluate(spec, 0.5 * (x + y)) - 0.5 * (evaluate(spec, x) + evaluate(spec, y));
        report.worst_gap = std::max(report.worst_gap, gap);
        if (gap > tol) ++report.violations;
    }
    return report;
}

// =============================================================================================
// Restriction to affine subspaces
// =============================================================================================

/// Restriction of f to base + span{points - base}; the basis is orthonormalised with a rank
/// cut of 1e-12 relative to the longest spanning vector.
inline FunctionSpec restrict_to_span(const FunctionSpec& spec, const Point& base, const std::vector<Point>& points) {
    if (points.empty()) throw DomainError("restrict_to_span: points must be non-empty");
    const Eigen::Index n = spec.dimension();
    require_dimension(base, n, "restrict_to_span base");
    double longest = 0.0;
    for (const auto& p : points) {
        require_dimension(p, n, "restrict_to_span point");
        longest = std::max(longest, (p - base).norm());
    }
    if (!(longest > 0.0)) throw DegenerateSpanError("restrict_to_span: all points coincide with the base");
    std::vector<Point> basis;
    for (const auto& p : points) {
        Point v = p - base;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : basis) v -= e.dot(v) * e;
        const double len = v.norm();
        if (len > 1e-12 * longest) basis.push_back(v / len);
    }
    if (basis.empty()) throw DegenerateSpanError("restrict_to_span: points span a zero-dimensional subspace");
    Matrix E(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) E.col(static_cast<Eigen::Index>(i)) = basis[i];
    const auto m = E.cols();
    return FunctionSpec(Restricted{spec.share(), base, std::move(E)}, m);
}

} // namespace alexcurv
