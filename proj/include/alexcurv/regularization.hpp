#pragma once

#include "parallel.hpp"
#include "surface.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace alexcurv {

// =============================================================================================
// Mollifier
// =============================================================================================

namespace detail {

/// exp(-1/(1-r^2)) for r < 1, else 0.
inline double bump_profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

/// Integral of the unit bump over the unit ball of R^n, by the radial integral.
inline double unit_bump_mass(Eigen::Index n) {
    static std::mutex cache_mutex;
    static std::map<Eigen::Index, double> cache;
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    const double dn = static_cast<double>(n);
    const double sphere = 2.0 * std::pow(std::numbers::pi, dn / 2.0) / boost::math::tgamma(dn / 2.0);
    const auto radial = [&](double r) { return std::pow(r, dn - 1.0) * bump_profile(r * r); };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, 20, 1e-15);
    const double mass = sphere * integral;
    std::lock_guard lock(cache_mutex);
    cache.emplace(n, mass);
    return mass;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count) {
    const auto zeros = boost::math::legendre_p_zeros<double>(count);
    std::vector<double> nodes;
    std::vector<double> weights;
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
        if (*it == 0.0) continue;
        const double d = boost::math::legendre_p_prime(count, *it);
        nodes.push_back(-*it);
        weights.push_back(2.0 / ((1.0 - *it * *it) * d * d));
    }
    const std::size_t negatives = nodes.size();
    if (count % 2 == 1) {
        const double d = boost::math::legendre_p_prime(count, 0.0);
        nodes.push_back(0.0);
        weights.push_back(2.0 / (d * d));
    }
    for (std::size_t i = negatives; i-- > 0;) {
        nodes.push_back(-nodes[i]);
        weights.push_back(weights[i]);
    }
    return {nodes, weights};
}

inline std::vector<int> first_primes(std::size_t count) {
    std::vector<int> primes;
    for (int c = 2; primes.size() < count; ++c) {
        bool prime = true;
        for (int p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

inline double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double out = 0.0;
    while (i > 0) {
        out += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
        i /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return out;
}

/// Unnormalised rule on the unit ball: offsets u, weights (cell weight) * bump(u).
inline QuadratureRule unit_rule(Eigen::Index n, const MollifierParams& params) {
    QuadratureRule rule;
    if (params.kind == QuadratureKind::tensor_gauss) {
        const auto [nodes, weights] = gauss_legendre(params.points_per_axis);
        const int g = static_cast<int>(nodes.size());
        std::vector<int> index(static_cast<std::size_t>(n), 0);
        Point u(n);
        for (;;) {
            double w = 1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                u[i] = nodes[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])];
                w *= weights[static_cast<std::size_t>(index[static_cast<std::size_t>(i)])];
            }
            const double b = bump_profile(u.squaredNorm());
            if (b > 0.0) {
                rule.offsets.push_back(u);
                rule.weights.push_back(w * b);
            }
            Eigen::Index axis = 0;
            while (axis < n && ++index[static_cast<std::size_t>(axis)] == g) index[static_cast<std::size_t>(axis++)] = 0;
            if (axis == n) break;
        }
    } else {
        // Randomly shifted Halton points on the cube, each paired with its reflection.
        const auto primes = first_primes(static_cast<std::size_t>(n));
        Rng rng(derive_seed(params.seed, "qmc-shift"));
        Point shift(n);
        for (Eigen::Index i = 0; i < n; ++i) shift[i] = uniform01(rng);
        const double cell = std::pow(2.0, static_cast<double>(n)) / static_cast<double>(params.samples);
        Point u(n);
        for (int s = 0; s < params.samples / 2; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double h = radical_inverse(static_cast<std::uint64_t>(s) + 1, primes[static_cast<std::size_t>(i)]);
                u[i] = 2.0 * std::fmod(h + shift[i], 1.0) - 1.0;
            }
            const double b = bump_profile(u.squaredNorm());
            if (b > 0.0) {
                rule.offsets.push_back(u);
                rule.weights.push_back(cell * b);
                rule.offsets.push_back(-u);
                rule.weights.push_back(cell * b);
            }
        }
    }
    if (rule.weights.empty()) throw DomainError("mollifier quadrature has no nodes inside the support ball");
    return rule;
}

} // namespace detail

/// Normalising constant c_{n,delta} of the mollifier on R^n.
inline double mollifier_constant(Eigen::Index n, double delta) {
    if (n < 1) throw DomainError("mollifier_constant: dimension must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("mollifier_constant: delta must be positive");
    return 1.0 / (std::pow(delta, static_cast<double>(n)) * detail::unit_bump_mass(n));
}

/// c_{n,delta} exp(-1/(1 - |x/delta|^2)) inside the delta-ball, 0 outside.
inline double mollifier_weight(const Point& x, double delta) {
    require_point(x, "mollifier_weight");
    const double c = mollifier_constant(x.size(), delta);
    return c * detail::bump_profile((x / delta).squaredNorm());
}

/// Unnormalised quadrature mass sum_j w_j phi_delta(y_j) of the rule in `params`; 1 up to the
/// rule's integration error.
inline double quadrature_mass(Eigen::Index n, const MollifierParams& params) {
    const auto rule = detail::unit_rule(n, params);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    return sum / detail::unit_bump_mass(n);
}

/// Discrete mollifier on the delta-ball, weights renormalised to sum to one.
inline QuadratureRule mollifier_rule(Eigen::Index n, const MollifierParams& params) {
    if (!(params.delta > 0.0) || !std::isfinite(params.delta)) throw DomainError("mollify: delta must be positive");
    if (params.kind == QuadratureKind::tensor_gauss && params.points_per_axis < 2)
        throw DomainError("mollify: points_per_axis must be >= 2");
    if (params.kind == QuadratureKind::quasi_monte_carlo && params.samples < 2)
        throw DomainError("mollify: samples must be >= 2");
    QuadratureRule rule = detail::unit_rule(n, params);
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (auto& w : rule.weights) w /= total;
    for (auto& y : rule.offsets) y *= params.delta;
    return rule;
}

/// f_delta = f * phi_delta, evaluated by quadrature.
inline FunctionSpec mollify(const FunctionSpec& spec, const MollifierParams& params) {
    if (known_nonconvex(spec)) throw UnsupportedOperationError("mollify: input function is not convex");
    auto rule = std::make_shared<const QuadratureRule>(mollifier_rule(spec.dimension(), params));
    if (auto inner = domain(spec); inner && !(inner->radius() > params.delta))
        throw DomainErosionError("mollify: delta exceeds the radius of the input domain");
    return FunctionSpec(Mollified{spec.share(), params, std::move(rule)}, spec.dimension());
}

// =============================================================================================
// Inf-sup convolution
// =============================================================================================

/// g_eps(x) = inf_z sup_y [f(y) - |y - z|^2 / (2 eps) + |x - z|^2 / eps]. The search domain
/// defaults to the input's own domain; L defaults to a sampled estimate over it.
inline FunctionSpec inf_sup_convolution(const FunctionSpec& spec, InfSupParams params) {
    if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon))
        throw DomainError("inf_sup_convolution: epsilon must be positive");
    if (params.grid_points < 3) throw DomainError("inf_sup_convolution: grid_points must be >= 3");
    if (params.polish_iterations < 1) throw DomainError("inf_sup_convolution: polish_iterations must be >= 1");
    if (known_nonconvex(spec)) throw UnsupportedOperationError("inf_sup_convolution: input function is not convex");
    const auto inner_domain = domain(spec);
    if (!params.search_domain) {
        if (!inner_domain) throw PreconditionError("inf_sup_convolution: a search domain is required");
        params.search_domain = inner_domain;
    }
    if (params.search_domain->dimension() != spec.dimension())
        throw DomainError("inf_sup_convolution: search domain dimension mismatch");
    if (inner_domain) {
        const double reach = (params.search_domain->center() - inner_domain->center()).norm() + params.search_domain->radius();
        if (reach > inner_domain->radius() * (1.0 + 1e-12))
            throw PreconditionError("inf_sup_convolution: search domain leaves the input domain");
    }
    if (!(params.lipschitz > 0.0)) params.lipschitz = lipschitz_estimate(spec, *params.search_domain, 2048, 0);
    const Eigen::Index n = spec.dimension();
    FunctionSpec out(InfSup{spec.share(), params}, n);
    const double margin = (detail::infsup_outer_window(params) + detail::infsup_inner_window(params)) *
                          std::sqrt(static_cast<double>(n));
    if (!(params.search_domain->radius() > margin))
        throw PreconditionError("inf_sup_convolution: epsilon * L exceeds the search-domain margin");
    return out;
}

/// Smallest search-domain radius around `region` that keeps region inside the inf-sup domain.
inline double inf_sup_required_radius(const Region& region, double epsilon, double lipschitz) {
    InfSupParams p;
    p.epsilon = epsilon;
    p.lipschitz = lipschitz;
    return region.radius() +
           (detail::infsup_outer_window(p) + detail::infsup_inner_window(p)) *
               std::sqrt(static_cast<double>(region.dimension()));
}

// =============================================================================================
// Regularisation report
// =============================================================================================

struct RegularizationOptions {
    int probes = 256;
    int probe_paths = 4;                 ///< random chords in addition to the axis diameters
    int length_m = 4096;                 ///< chords per probe path
    double convexity_tol = 1e-8;
    double lipschitz_min_separation = 0.05; ///< relative to the region radius
    double gradient_step_factor = 0.01;     ///< h = factor * level
    double second_diff_step_factor = 0.25;  ///< h = factor * level
    int jobs = 1;
};

struct RegularizationReport {
    std::string kind; ///< "mollified" or "inf_sup"
    double level = 0.0; ///< delta or epsilon
    int probes = 0;
    double sup_dev = 0.0;
    double lipschitz_original = 0.0;
    double lipschitz_sampled = 0.0;
    double lip_ratio = 0.0;
    ConvexityReport convexity;
    std::optional<double> grad_dev;        ///< C^{1,1} inputs only
    double length_dev = 0.0;
    std::optional<double> second_diff_max; ///< inf-sup only
    std::optional<double> second_diff_bound; ///< 2 / eps for inf-sup
    std::vector<std::string> failures;
};

/// Fixed probe paths for a region: the diameters along each axis followed by `extra` random
/// chords drawn from `seed`.
inline std::vector<PolygonalPath> probe_paths(const Region& region, int extra, std::uint64_t seed) {
    std::vector<PolygonalPath> paths;
    const Eigen::Index n = region.dimension();
    for (Eigen::Index i = 0; i < n; ++i) {
        Point e = Point::Zero(n);
        e[i] = region.radius();
        paths.emplace_back(region.project(region.center() - e), region.project(region.center() + e));
    }
    Rng rng(derive_seed(seed, "probe-paths"));
    for (int s = 0; s < extra; ++s) {
        Point a = sample_in_region(rng, region);
        Point b = sample_in_region(rng, region);
        if ((a - b).norm() > 1e-6 * region.radius()) paths.emplace_back(std::move(a), std::move(b));
    }
    return paths;
}

namespace detail {

/// Sampled Lipschitz quotient over pairs separated by at least min_sep.
inline double sampled_lipschitz(const FunctionSpec& f, const Region& region, int samples, double min_sep,
                                std::uint64_t seed) {
    Rng rng(derive_seed(seed, "regularization-lipschitz"));
    double best = 0.0;
    int taken = 0;
    for (int attempt = 0; taken < samples && attempt < 64 * samples; ++attempt) {
        const Point x = sample_in_region(rng, region);
        const Point y = sample_in_region(rng, region);
        const double d = (x - y).norm();
        if (d < min_sep) continue;
        ++taken;
        best = std::max(best, std::abs(evaluate(f, x) - evaluate(f, y)) / d);
    }
    return best;
}

inline double regularization_level(const FunctionSpec& f, std::string& kind) {
    if (const auto* m = std::get_if<Mollified>(&f.family())) {
        kind = "mollified";
        return m->params.delta;
    }
    if (const auto* g = std::get_if<InfSup>(&f.family())) {
        kind = "inf_sup";
        return g->params.epsilon;
    }
    throw DomainError("regularization_report: regularized function must be mollified or inf_sup");
}

} // namespace detail

/// Measured regularisation properties of `regularized` against `original` over the region.
inline RegularizationReport regularization_report(const FunctionSpec& original, const FunctionSpec& regularized,
                                                  const Region& region, std::uint64_t rng_seed,
                                                  const RegularizationOptions& opts = {}) {
    if (original.dimension() != regularized.dimension() || region.dimension() != original.dimension())
        throw DomainError("regularization_report: dimension mismatch");
    if (opts.probes < 1) throw DomainError("regularization_report: probes must be >= 1");
    RegularizationReport report;
    report.level = detail::regularization_level(regularized, report.kind);
    report.probes = opts.probes;
    const Eigen::Index n = original.dimension();

    // Probe points: the region center, then uniform samples.
    std::vector<Point> probes;
    probes.push_back(region.center());
    {
        Rng rng(derive_seed(rng_seed, "regularization-probes"));
        while (static_cast<int>(probes.size()) < opts.probes) probes.push_back(sample_in_region(rng, region));
    }

    const bool c11 = is_c11(original);
    const bool inf_sup = report.kind == "inf_sup";
    struct ProbeResult {
        double dev = 0.0;
        double grad = 0.0;
        double second = -std::numeric_limits<double>::infinity();
        std::string failure;
    };
    std::vector<ProbeResult> results(probes.size());
    parallel_for(probes.size(), opts.jobs, [&](std::size_t i) {
        const Point& x = probes[i];
        auto& r = results[i];
        try {
            const double gx = evaluate(regularized, x);
            r.dev = std::abs(gx - evaluate(original, x));
            if (c11) {
                const double h = opts.gradient_step_factor * report.level;
                const Point fd = detail::finite_difference_gradient(regularized, x, h);
                r.grad = (fd - subgradient(original, x)).norm();
            }
            if (inf_sup) {
                const double h = opts.second_diff_step_factor * report.level;
                for (Eigen::Index d = 0; d < n; ++d) {
                    Point e = Point::Zero(n);
                    e[d] = h;
                    r.second = std::max(r.second, (evaluate(regularized, x + e) - 2.0 * gx + evaluate(regularized, x - e)) / (h * h));
                }
            }
        } catch (const Error& e) {
            r.failure = e.what();
        }
    });
    for (const auto& r : results) {
        if (!r.failure.empty()) {
            report.failures.push_back(r.failure);
            continue;
        }
        report.sup_dev = std::max(report.sup_dev, r.dev);
        if (c11) report.grad_dev = std::max(report.grad_dev.value_or(0.0), r.grad);
        if (inf_sup) report.second_diff_max = std::max(report.second_diff_max.value_or(r.second), r.second);
    }
    if (inf_sup) report.second_diff_bound = 2.0 / report.level;

    const double min_sep = opts.lipschitz_min_separation * region.radius();
    const auto exact = exact_lipschitz_bound(original, region);
    report.lipschitz_original =
        exact ? *exact : detail::sampled_lipschitz(original, region, opts.probes, min_sep, rng_seed);
    report.lipschitz_sampled = detail::sampled_lipschitz(regularized, region, opts.probes, min_sep, rng_seed);
    report.lip_ratio = report.lipschitz_original > 0.0 ? report.lipschitz_sampled / report.lipschitz_original
                                                       : (report.lipschitz_sampled > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

    report.convexity = convexity_check(regularized, region, opts.probes, opts.convexity_tol, rng_seed);

    const auto paths = probe_paths(region, opts.probe_paths, rng_seed);
    const GraphSurface f_surface(original, region, 1.0);
    const GraphSurface g_surface(regularized, region, 1.0);
    std::vector<double> deviations(paths.size(), 0.0);
    parallel_for(paths.size(), opts.jobs, [&](std::size_t i) {
        deviations[i] = std::abs(path_lift_length(g_surface, paths[i], opts.length_m) -
                                 path_lift_length(f_surface, paths[i], opts.length_m));
    });
    for (double d : deviations) report.length_dev = std::max(report.length_dev, d);
    return report;
}

} // namespace alexcurv
