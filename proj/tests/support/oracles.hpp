#pragma once

// Independent reference computations for the test suite. None of these reuse the library's
// path optimiser, length bounds or quadrature rules.

#include <alexcurv.hpp>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/dijkstra_shortest_paths.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

using alexcurv::Point;

// ---------------------------------------------------------------------------------------------
// Arclength of a lifted segment by adaptive Gauss-Kronrod on |sigma'| with an analytic
// directional derivative.
// ---------------------------------------------------------------------------------------------

/// Length of t -> (p + t(q - p), f(p + t(q - p))), t in [0, 1], given g(t) = d/dt f.
inline double lifted_arclength(const Point& p, const Point& q, const std::function<double(double)>& dfdt) {
    const double base = (q - p).norm();
    auto integrand = [&](double t) {
        const double h = dfdt(t);
        return std::sqrt(base * base + h * h);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-13);
}

/// Directional derivative of 1/2 x^T A x + b^T x along the segment p -> q.
inline std::function<double(double)> quadratic_dfdt(const Eigen::MatrixXd& A, const Point& b, const Point& p,
                                                    const Point& q) {
    return [A, b, p, q](double t) {
        const Point x = p + t * (q - p);
        return (A * x + b).dot(q - p);
    };
}

// ---------------------------------------------------------------------------------------------
// Grid graph shortest paths on the lifted surface (boost::graph Dijkstra). Nodes are the
// lattice points of the region; edges join lattice points whose offset has coprime
// coordinates with max-norm <= stencil, weighted by a fine chordal length of the lifted edge.
// ---------------------------------------------------------------------------------------------

class GridGeodesics {
  public:
    GridGeodesics(std::function<double(const Point&)> f, double radius, int half_cells, int stencil = 3,
                  int edge_chords = 8)
        : f_(std::move(f)), radius_(radius), half_(half_cells), h_(radius / half_cells) {
        const int side = 2 * half_ + 1;
        index_.assign(static_cast<std::size_t>(side * side), -1);
        for (int i = -half_; i <= half_; ++i)
            for (int j = -half_; j <= half_; ++j) {
                const Point x = node_point(i, j);
                if (x.norm() <= radius_ * (1.0 + 1e-12)) {
                    index_[flat(i, j)] = static_cast<int>(coords_.size());
                    coords_.push_back({i, j});
                }
            }
        graph_ = Graph(coords_.size());
        std::vector<std::array<int, 2>> offsets;
        for (int di = -stencil; di <= stencil; ++di)
            for (int dj = -stencil; dj <= stencil; ++dj)
                if ((di != 0 || dj != 0) && std::gcd(std::abs(di), std::abs(dj)) == 1) offsets.push_back({di, dj});
        for (std::size_t v = 0; v < coords_.size(); ++v) {
            const auto [i, j] = coords_[v];
            for (const auto& [di, dj] : offsets) {
                const int w = node(i + di, j + dj);
                if (w < 0 || static_cast<std::size_t>(w) < v) continue;
                const Point p = node_point(i, j);
                const Point q = node_point(i + di, j + dj);
                boost::add_edge(v, static_cast<std::size_t>(w), lifted_chords(p, q, edge_chords), graph_);
            }
        }
    }

    double spacing() const { return h_; }
    Point node_point(int i, int j) const { return alexcurv::make_point({i * h_, j * h_}); }
    int node(int i, int j) const {
        if (std::abs(i) > half_ || std::abs(j) > half_) return -1;
        return index_[flat(i, j)];
    }

    /// Distances from lattice node (i, j) to every node, indexed like node().
    std::vector<double> from(int i, int j) const {
        const int s = node(i, j);
        if (s < 0) throw std::invalid_argument("GridGeodesics: source outside the region");
        std::vector<double> dist(coords_.size());
        boost::dijkstra_shortest_paths(graph_, static_cast<std::size_t>(s),
                                       boost::distance_map(boost::make_iterator_property_map(
                                           dist.begin(), boost::get(boost::vertex_index, graph_))));
        return dist;
    }

    double distance(int i0, int j0, int i1, int j1) const { return from(i0, j0)[static_cast<std::size_t>(node(i1, j1))]; }

  private:
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                                       boost::property<boost::edge_weight_t, double>>;

    std::size_t flat(int i, int j) const {
        return static_cast<std::size_t>((i + half_) * (2 * half_ + 1) + (j + half_));
    }

    double lifted_chords(const Point& p, const Point& q, int chords) const {
        double total = 0.0;
        double prev_h = f_(p);
        Point prev = p;
        for (int s = 1; s <= chords; ++s) {
            const Point x = p + (q - p) * (static_cast<double>(s) / chords);
            const double hx = f_(x);
            total += std::sqrt((x - prev).squaredNorm() + (hx - prev_h) * (hx - prev_h));
            prev = x;
            prev_h = hx;
        }
        return total;
    }

    std::function<double(const Point&)> f_;
    double radius_;
    int half_;
    double h_;
    std::vector<int> index_;
    std::vector<std::array<int, 2>> coords_;
    Graph graph_;
};

// ---------------------------------------------------------------------------------------------
// Geodesic shooting on the graph of a planar quadratic 1/2 x^T A x + b^T x. Base-coordinate
// geodesic equation: x'' = -(x'^T A x') grad f / (1 + |grad f|^2), unit lifted speed.
// ---------------------------------------------------------------------------------------------

struct Shot {
    double length;     ///< arclength at the closest approach
    double miss;       ///< signed distance of the closest approach from the target (left positive)
    double clearance;  ///< unsigned closest-approach distance
};

inline Shot shoot(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, const Eigen::Vector2d& from,
                  const Eigen::Vector2d& to, double angle, double max_length) {
    using State = std::array<double, 4>;
    auto rhs = [&](const State& s, State& ds, double) {
        const Eigen::Vector2d x(s[0], s[1]);
        const Eigen::Vector2d v(s[2], s[3]);
        const Eigen::Vector2d g = A * x + b;
        const double k = v.dot(A * v) / (1.0 + g.squaredNorm());
        ds = {v[0], v[1], -k * g[0], -k * g[1]};
    };
    Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    const Eigen::Vector2d g0 = A * from + b;
    dir /= std::sqrt(1.0 + std::pow(g0.dot(dir), 2)); // unit lifted speed
    State s{from[0], from[1], dir[0], dir[1]};
    Shot best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    stepper.initialize(s, 0.0, 1e-3);
    double prev_t = 0.0;
    while (stepper.current_time() < max_length) {
        stepper.do_step(rhs);
        const double t1 = stepper.current_time();
        // Closest approach inside the step by golden-section on the dense output.
        auto dist_at = [&](double t) {
            State st;
            stepper.calc_state(t, st);
            return (Eigen::Vector2d(st[0], st[1]) - to).norm();
        };
        const auto [t_best, d_best] = boost::math::tools::brent_find_minima(dist_at, prev_t, t1, 52);
        if (d_best < best.clearance) {
            State st;
            stepper.calc_state(t_best, st);
            const Eigen::Vector2d x(st[0], st[1]);
            const Eigen::Vector2d v(st[2], st[3]);
            const Eigen::Vector2d r = to - x;
            best = Shot{t_best, (v[0] * r[1] - v[1] * r[0]) / v.norm(), d_best};
        }
        prev_t = t1;
    }
    return best;
}

/// Length of the geodesic from `from` to `to` whose initial direction lies within `window` of
/// `guess_angle`, found by bracketing the signed miss.
inline double shooting_distance(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, const Eigen::Vector2d& from,
                                const Eigen::Vector2d& to, double guess_angle, double window, double max_length) {
    auto miss = [&](double angle) { return shoot(A, b, from, to, angle, max_length).miss; };
    double lo = guess_angle - window;
    double hi = guess_angle + window;
    if (miss(lo) * miss(hi) > 0.0) {
        const Shot s = shoot(A, b, from, to, guess_angle, max_length);
        if (s.clearance < 1e-9) return s.length;
        throw std::runtime_error("shooting_distance: miss does not change sign over the window");
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto [a, c] = boost::math::tools::toms748_solve(miss, lo, hi, tol, iters);
    const Shot s = shoot(A, b, from, to, 0.5 * (a + c), max_length);
    if (s.clearance > 1e-7) throw std::runtime_error("shooting_distance: root does not reach the target");
    return s.length;
}

// ---------------------------------------------------------------------------------------------
// Midpoint convexity on a deterministic grid of pairs.
// ---------------------------------------------------------------------------------------------

/// Largest f((x+y)/2) - (f(x)+f(y))/2 over lattice pairs of the disc of given radius.
inline double worst_midpoint_gap(const std::function<double(const Point&)>& f, double radius, int half_cells) {
    std::vector<Point> pts;
    const double h = radius / half_cells;
    for (int i = -half_cells; i <= half_cells; ++i)
        for (int j = -half_cells; j <= half_cells; ++j) {
            Point x = alexcurv::make_point({i * h, j * h});
            if (x.norm() <= radius) pts.push_back(std::move(x));
        }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t c = a + 1; c < pts.size(); ++c)
            worst = std::max(worst, f(0.5 * (pts[a] + pts[c])) - 0.5 * (f(pts[a]) + f(pts[c])));
    return worst;
}

// ---------------------------------------------------------------------------------------------
// Nested dense-grid inf-sup evaluation in one dimension:
//   g(x) = inf_z sup_y [ f(y) - (y - z)^2 / (2 eps) + (x - z)^2 / eps ].
// ---------------------------------------------------------------------------------------------

inline double nested_grid_inf_sup(const std::function<double(double)>& f, double eps, double x, double half_width,
                                  int points) {
    auto inner = [&](double z) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < points; ++i) {
            const double y = z - half_width + 2.0 * half_width * i / (points - 1);
            best = std::max(best, f(y) - (y - z) * (y - z) / (2.0 * eps));
        }
        return best + (x - z) * (x - z) / eps;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double z = x - half_width + 2.0 * half_width * i / (points - 1);
        best = std::min(best, inner(z));
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// Mollifier normalisation by tanh-sinh quadrature of the radial profile.
// ---------------------------------------------------------------------------------------------

/// Integral of exp(-1/(1-|x|^2)) over the unit ball of R^n.
inline double unit_bump_integral(int n) {
    const double sphere_area = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
    auto radial = [n](double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) * std::pow(r, n - 1) : 0.0; };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return sphere_area * integrator.integrate(radial, 0.0, 1.0);
}

/// First absolute moment of the 1-d unit mollifier: int |y| phi(y) dy.
inline double unit_bump_abs_moment_1d() {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto bump = [](double y) { return std::exp(-1.0 / (1.0 - y * y)); };
    const double mass = integrator.integrate(bump, -1.0, 1.0);
    const double moment = 2.0 * integrator.integrate([&](double y) { return y * bump(y); }, 0.0, 1.0);
    return moment / mass;
}

/// Second moment of the 1-d unit mollifier: int y^2 phi(y) dy.
inline double unit_bump_second_moment_1d() {
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto bump = [](double y) { return std::exp(-1.0 / (1.0 - y * y)); };
    const double mass = integrator.integrate(bump, -1.0, 1.0);
    return integrator.integrate([&](double y) { return y * y * bump(y); }, -1.0, 1.0) / mass;
}

// ---------------------------------------------------------------------------------------------
// Spherical distances and Euclidean angles.
// ---------------------------------------------------------------------------------------------

inline double euclidean_angle(const Point& vertex, const Point& x, const Point& z) {
    const Point u = x - vertex;
    const Point v = z - vertex;
    return std::atan2(std::abs(u[0] * v[1] - u[1] * v[0]), u.dot(v));
}

} // namespace oracle
