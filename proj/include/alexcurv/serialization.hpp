#pragma once

#include "curvature_checks.hpp"
#include "regularization.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace alexcurv {

using Json = nlohmann::json;

// =============================================================================================
// Reading helpers. Every failure raises ConfigError carrying the offending field path.
// =============================================================================================

namespace json_read {

inline std::string child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(child(path, key), "missing required field");
    return *it;
}

inline const Json* optional_field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
    return v;
}

inline double positive(const Json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v > 0.0)) throw ConfigError(path, "must be positive");
    return v;
}

inline int positive_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < 1 || v > std::numeric_limits<int>::max()) throw ConfigError(path, "must be a positive integer");
    return static_cast<int>(v);
}

inline std::uint64_t unsigned_int(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw ConfigError(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline std::string string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

inline Point point(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = number(j[i], index(path, i));
    return p;
}

inline Point point_of_dimension(const Json& j, Eigen::Index n, const std::string& path) {
    Point p = point(j, path);
    if (p.size() != n) throw ConfigError(path, fmt::format("expected {} coordinates, got {}", n, p.size()));
    return p;
}

/// Row-major nested array.
inline Matrix matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
    const Point first = point(j[0], index(path, 0));
    Matrix m(static_cast<Eigen::Index>(j.size()), first.size());
    for (std::size_t r = 0; r < j.size(); ++r)
        m.row(static_cast<Eigen::Index>(r)) = point_of_dimension(j[r], first.size(), index(path, r)).transpose();
    return m;
}

} // namespace json_read

// =============================================================================================
// Points, paths, regions
// =============================================================================================

inline Json to_json(const Point& p) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(p[i]);
    return out;
}

inline Json to_json(const PolygonalPath& path) {
    Json out = Json::array();
    for (const auto& p : path.breakpoints()) out.push_back(to_json(p));
    return out;
}

inline Json to_json(const Region& region) {
    Json out{{"center", to_json(region.center())}, {"radius", region.radius()}};
    if (region.box()) out["box"] = {{"lo", to_json(region.box()->first)}, {"hi", to_json(region.box()->second)}};
    return out;
}

inline Region region_from_json(const Json& j, const std::string& path) {
    using namespace json_read;
    const double radius = positive(field(j, "radius", path), child(path, "radius"));
    Point center = point(field(j, "center", path), child(path, "center"));
    if (const Json* box = optional_field(j, "box", path)) {
        const std::string bp = child(path, "box");
        Point lo = point_of_dimension(field(*box, "lo", bp), center.size(), child(bp, "lo"));
        Point hi = point_of_dimension(field(*box, "hi", bp), center.size(), child(bp, "hi"));
        if ((lo.array() > hi.array()).any()) throw ConfigError(bp, "lo exceeds hi");
        return Region(std::move(center), radius, std::move(lo), std::move(hi));
    }
    return Region(std::move(center), radius);
}

// =============================================================================================
// Function specs and bodies: {"family", "dimension", "params"} / {"constraints", "interior_point"}
// =============================================================================================

inline Json to_json(const FunctionSpec& spec);
inline Json to_json(const ConvexBody& body);

inline Json pieces_to_json(const std::vector<AffinePiece>& pieces) {
    Json out = Json::array();
    for (const auto& piece : pieces) out.push_back({{"a", to_json(piece.a)}, {"b", piece.b}});
    return out;
}

inline Json to_json(const MollifierParams& p) {
    if (p.kind == QuadratureKind::tensor_gauss)
        return {{"kind", "tensor_gauss"}, {"points_per_axis", p.points_per_axis}};
    return {{"kind", "quasi_monte_carlo"}, {"samples", p.samples}, {"seed", p.seed}};
}

inline Json to_json(const ConvexBody& body) {
    Json constraints = Json::array();
    for (const auto& c : body.constraints()) {
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Halfspace>)
                    constraints.push_back({{"type", "halfspace"}, {"normal", to_json(k.normal)}, {"offset", k.offset}});
                else if constexpr (std::is_same_v<T, BallConstraint>)
                    constraints.push_back({{"type", "ball"}, {"center", to_json(k.center)}, {"radius", k.radius}});
                else
                    constraints.push_back({{"type", "sublevel"}, {"function", to_json(*k.function)}, {"level", k.level}});
            },
            c);
    }
    return {{"dimension", body.dimension()},
            {"constraints", std::move(constraints)},
            {"interior_point", to_json(body.interior_point())}};
}

inline Json to_json(const FunctionSpec& spec) {
    Json params = std::visit(
        [](const auto& f) -> Json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, QuadraticForm>) {
                Json rows = Json::array();
                for (Eigen::Index r = 0; r < f.A.rows(); ++r) rows.push_back(to_json(Point(f.A.row(r).transpose())));
                return {{"A", std::move(rows)}, {"b", to_json(f.b)}, {"c", f.c}};
            } else if constexpr (std::is_same_v<T, MaxAffine>) {
                return {{"pieces", pieces_to_json(f.pieces)}};
            } else if constexpr (std::is_same_v<T, NormScaled>) {
                return {{"alpha", f.alpha}};
            } else if constexpr (std::is_same_v<T, LogSumExp>) {
                return {{"pieces", pieces_to_json(f.pieces)}, {"temperature", f.temperature}};
            } else if constexpr (std::is_same_v<T, BoundaryChart>) {
                const auto& c = *f.chart;
                return {{"body", to_json(c.body())},
                        {"base_point", to_json(c.base_point())},
                        {"interior_point", to_json(c.interior_point())},
                        {"chart_radius", c.chart_radius()},
                        {"bisection_tol", c.bisection_tol()}};
            } else if constexpr (std::is_same_v<T, Mollified>) {
                return {{"inner", to_json(*f.inner)}, {"delta", f.params.delta}, {"quadrature", to_json(f.params)}};
            } else if constexpr (std::is_same_v<T, InfSup>) {
                Json out{{"inner", to_json(*f.inner)},
                         {"epsilon", f.params.epsilon},
                         {"search", {{"grid_points", f.params.grid_points}, {"polish_iterations", f.params.polish_iterations}}},
                         {"lipschitz", f.params.lipschitz}};
                if (f.params.search_domain) out["search_domain"] = to_json(*f.params.search_domain);
                return out;
            } else {
                Json columns = Json::array();
                for (Eigen::Index c = 0; c < f.basis.cols(); ++c) columns.push_back(to_json(Point(f.basis.col(c))));
                return {{"inner", to_json(*f.inner)}, {"base", to_json(f.base)}, {"basis", std::move(columns)}};
            }
        },
        spec.family());
    return {{"family", spec.family_name()}, {"dimension", spec.dimension()}, {"params", std::move(params)}};
}

inline FunctionSpec function_from_json(const Json& j, const std::string& path = "function");
inline ConvexBody body_from_json(const Json& j, const std::string& path = "body");

namespace detail {

inline std::vector<AffinePiece> pieces_from_json(const Json& j, Eigen::Index n, const std::string& path) {
    using namespace json_read;
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of pieces");
    std::vector<AffinePiece> pieces;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string pp = index(path, i);
        pieces.push_back(AffinePiece{point_of_dimension(field(j[i], "a", pp), n, child(pp, "a")),
                                     number(field(j[i], "b", pp), child(pp, "b"))});
    }
    return pieces;
}

inline MollifierParams mollifier_params_from_json(const Json& j, double delta, const std::string& path) {
    using namespace json_read;
    MollifierParams p;
    p.delta = delta;
    const std::string kind = string(field(j, "kind", path), child(path, "kind"));
    if (kind == "tensor_gauss") {
        p.kind = QuadratureKind::tensor_gauss;
        if (const Json* v = optional_field(j, "points_per_axis", path))
            p.points_per_axis = positive_int(*v, child(path, "points_per_axis"));
    } else if (kind == "quasi_monte_carlo") {
        p.kind = QuadratureKind::quasi_monte_carlo;
        if (const Json* v = optional_field(j, "samples", path)) p.samples = positive_int(*v, child(path, "samples"));
        p.seed = unsigned_int(field(j, "seed", path), child(path, "seed"));
    } else {
        throw ConfigError(child(path, "kind"), "unknown quadrature kind '" + kind + "'");
    }
    return p;
}

/// Library errors raised while building a spec are reported against the spec's path.
template <typename Build>
auto at_path(const std::string& path, Build&& build) {
    try {
        return build();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

} // namespace detail

inline FunctionSpec function_from_json(const Json& j, const std::string& path) {
    using namespace json_read;
    const std::string family = string(field(j, "family", path), child(path, "family"));
    const int n = positive_int(field(j, "dimension", path), child(path, "dimension"));
    const std::string pp = child(path, "params");
    const Json& params = field(j, "params", path);
    if (!params.is_object()) throw ConfigError(pp, "expected an object");
    const Eigen::Index dim = n;

    const auto check_dimension = [&](const FunctionSpec& spec) {
        if (spec.dimension() != dim)
            throw ConfigError(child(path, "dimension"),
                              fmt::format("declared {} but parameters give {}", dim, spec.dimension()));
        return spec;
    };

    if (family == "quadratic_form") {
        Matrix A = matrix(field(params, "A", pp), child(pp, "A"));
        if (A.rows() != dim || A.cols() != dim) throw ConfigError(child(pp, "A"), fmt::format("expected a {0}x{0} matrix", dim));
        Point b = params.contains("b") ? point_of_dimension(params["b"], dim, child(pp, "b")) : Point(Point::Zero(dim));
        const double c = params.contains("c") ? number(params["c"], child(pp, "c")) : 0.0;
        return detail::at_path(pp, [&] { return FunctionSpec::quadratic(A, b, c); });
    }
    if (family == "max_affine") {
        auto pieces = detail::pieces_from_json(field(params, "pieces", pp), dim, child(pp, "pieces"));
        return detail::at_path(pp, [&] { return FunctionSpec::max_affine(std::move(pieces)); });
    }
    if (family == "norm_scaled") {
        const double alpha = number(field(params, "alpha", pp), child(pp, "alpha"));
        if (alpha < 0.0) throw ConfigError(child(pp, "alpha"), "must be non-negative");
        return FunctionSpec::norm_scaled(dim, alpha);
    }
    if (family == "log_sum_exp") {
        auto pieces = detail::pieces_from_json(field(params, "pieces", pp), dim, child(pp, "pieces"));
        const double temperature = positive(field(params, "temperature", pp), child(pp, "temperature"));
        return detail::at_path(pp, [&] { return FunctionSpec::log_sum_exp(std::move(pieces), temperature); });
    }
    if (family == "boundary_chart") {
        ConvexBody body = body_from_json(field(params, "body", pp), child(pp, "body"));
        const Eigen::Index bn = body.dimension();
        Point x0 = point_of_dimension(field(params, "base_point", pp), bn, child(pp, "base_point"));
        Point y = point_of_dimension(field(params, "interior_point", pp), bn, child(pp, "interior_point"));
        const double radius = positive(field(params, "chart_radius", pp), child(pp, "chart_radius"));
        const double tol = params.contains("bisection_tol") ? positive(params["bisection_tol"], child(pp, "bisection_tol")) : 1e-8;
        return check_dimension(
            detail::at_path(pp, [&] { return lower_boundary_function(body, x0, y, radius, tol); }));
    }
    if (family == "mollified") {
        FunctionSpec inner = function_from_json(field(params, "inner", pp), child(pp, "inner"));
        const double delta = positive(field(params, "delta", pp), child(pp, "delta"));
        MollifierParams mp = MollifierParams::standard(delta, dim);
        if (const Json* q = optional_field(params, "quadrature", pp))
            mp = detail::mollifier_params_from_json(*q, delta, child(pp, "quadrature"));
        return check_dimension(detail::at_path(pp, [&] { return mollify(inner, mp); }));
    }
    if (family == "inf_sup") {
        FunctionSpec inner = function_from_json(field(params, "inner", pp), child(pp, "inner"));
        InfSupParams ip;
        ip.epsilon = positive(field(params, "epsilon", pp), child(pp, "epsilon"));
        if (const Json* s = optional_field(params, "search", pp)) {
            const std::string sp = child(pp, "search");
            if (const Json* g = optional_field(*s, "grid_points", sp)) ip.grid_points = positive_int(*g, child(sp, "grid_points"));
            if (const Json* it = optional_field(*s, "polish_iterations", sp))
                ip.polish_iterations = positive_int(*it, child(sp, "polish_iterations"));
        }
        if (const Json* d = optional_field(params, "search_domain", pp))
            ip.search_domain = region_from_json(*d, child(pp, "search_domain"));
        if (const Json* l = optional_field(params, "lipschitz", pp)) {
            ip.lipschitz = number(*l, child(pp, "lipschitz"));
            if (ip.lipschitz < 0.0) throw ConfigError(child(pp, "lipschitz"), "must be non-negative");
        }
        return check_dimension(detail::at_path(pp, [&] { return inf_sup_convolution(inner, ip); }));
    }
    if (family == "restricted") {
        FunctionSpec inner = function_from_json(field(params, "inner", pp), child(pp, "inner"));
        Point base = point_of_dimension(field(params, "base", pp), inner.dimension(), child(pp, "base"));
        const Json& basis = field(params, "basis", pp);
        if (!basis.is_array() || basis.empty()) throw ConfigError(child(pp, "basis"), "expected a non-empty array of vectors");
        std::vector<Point> points;
        for (std::size_t i = 0; i < basis.size(); ++i)
            points.push_back(base + point_of_dimension(basis[i], inner.dimension(), index(child(pp, "basis"), i)));
        return check_dimension(detail::at_path(pp, [&] { return restrict_to_span(inner, base, points); }));
    }
    throw ConfigError(child(path, "family"), "unknown family '" + family + "'");
}

inline ConvexBody body_from_json(const Json& j, const std::string& path) {
    using namespace json_read;
    const Json& constraints = field(j, "constraints", path);
    const std::string cp = child(path, "constraints");
    if (!constraints.is_array() || constraints.empty()) throw ConfigError(cp, "expected a non-empty array");
    Point interior = point(field(j, "interior_point", path), child(path, "interior_point"));
    const Eigen::Index n = interior.size();
    if (const Json* d = optional_field(j, "dimension", path))
        if (positive_int(*d, child(path, "dimension")) != n)
            throw ConfigError(child(path, "dimension"), "does not match interior_point");
    std::vector<Constraint> out;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const std::string ip = index(cp, i);
        const Json& c = constraints[i];
        const std::string type = string(field(c, "type", ip), child(ip, "type"));
        if (type == "halfspace") {
            out.push_back(Halfspace{point_of_dimension(field(c, "normal", ip), n, child(ip, "normal")),
                                    number(field(c, "offset", ip), child(ip, "offset"))});
        } else if (type == "ball") {
            out.push_back(BallConstraint{point_of_dimension(field(c, "center", ip), n, child(ip, "center")),
                                         positive(field(c, "radius", ip), child(ip, "radius"))});
        } else if (type == "sublevel") {
            FunctionSpec f = function_from_json(field(c, "function", ip), child(ip, "function"));
            if (f.dimension() != n) throw ConfigError(child(ip, "function"), "dimension does not match the body");
            out.push_back(Sublevel{f.share(), number(field(c, "level", ip), child(ip, "level"))});
        } else {
            throw ConfigError(child(ip, "type"), "unknown constraint type '" + type + "'");
        }
    }
    return detail::at_path(path, [&] { return ConvexBody(n, std::move(out), interior); });
}

// =============================================================================================
// Results
// =============================================================================================

/// Non-finite values serialise as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const DistanceEstimate& d) {
    return {{"value", d.value},
            {"lower", d.lower_bound},
            {"upper", d.upper_bound},
            {"k", d.breakpoints},
            {"m", d.subdivision},
            {"converged", d.converged},
            {"witness", to_json(d.witness)}};
}

inline Json to_json(const Quadruple& q) {
    return {{"a", to_json(q.a)}, {"b", to_json(q.b)}, {"c", to_json(q.c)}, {"p", to_json(q.p)}};
}

inline Json to_json(const QuadrupleReport& r) {
    Json distances = Json::object();
    for (std::size_t k = 0; k < 6; ++k) distances[kQuadruplePairNames[k]] = to_json(r.distances[k]);
    Json out{{"quad", to_json(r.quad)},
             {"distances", std::move(distances)},
             {"angles", {finite_or_null(r.angles[0]), finite_or_null(r.angles[1]), finite_or_null(r.angles[2])}},
             {"angle_sum", finite_or_null(r.angle_sum)},
             {"excess", finite_or_null(r.excess)},
             {"slack", finite_or_null(r.slack)},
             {"verdict", to_string(r.verdict)}};
    if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
    return out;
}

inline Json to_json(const QuadrupleAggregate& agg) {
    Json out{{"checked", agg.checked},
             {"satisfied", agg.satisfied},
             {"violated", agg.violated},
             {"inconclusive", agg.inconclusive},
             {"max_excess", finite_or_null(agg.max_excess)},
             {"max_slack", finite_or_null(agg.max_slack)}};
    out["argmax_quad"] = agg.argmax_quad ? to_json(*agg.argmax_quad) : Json(nullptr);
    out["argmax_index"] = agg.argmax_index ? Json(*agg.argmax_index) : Json(nullptr);
    return out;
}

inline Json to_json(const ConvexityReport& r) {
    return {{"samples", r.samples}, {"violations", r.violations}, {"worst_gap", finite_or_null(r.worst_gap)}};
}

inline Json optional_json(const std::optional<double>& v) { return v ? finite_or_null(*v) : Json(nullptr); }

/// One block per measured property.
inline Json to_json(const RegularizationReport& r) {
    return {{"kind", r.kind},
            {"level", r.level},
            {"probes", r.probes},
            {"uniform_convergence", {{"sup_dev", r.sup_dev}}},
            {"lipschitz",
             {{"original", r.lipschitz_original}, {"sampled", r.lipschitz_sampled}, {"ratio", finite_or_null(r.lip_ratio)}}},
            {"convexity", to_json(r.convexity)},
            {"gradient_convergence", {{"grad_dev", optional_json(r.grad_dev)}}},
            {"length_convergence", {{"length_dev", r.length_dev}}},
            {"second_differences", {{"max", optional_json(r.second_diff_max)}, {"bound", optional_json(r.second_diff_bound)}}},
            {"failures", r.failures}};
}

// =============================================================================================
// CSV
// =============================================================================================

/// Shortest round-trip representation; non-finite values are written as nan / inf / -inf.
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != header.size()) throw DomainError("CsvTable: row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::string str() const {
        std::string out = fmt::format("{}\n", fmt::join(header, ","));
        for (const auto& row : rows) out += fmt::format("{}\n", fmt::join(row, ","));
        return out;
    }
};

/// Per-quadruple table: quad_id, six distances (value/lower/upper), three angles, excess,
/// slack, verdict.
inline CsvTable quadruple_table(const std::vector<QuadrupleReport>& reports) {
    CsvTable table;
    table.header.push_back("quad_id");
    for (const char* name : kQuadruplePairNames) {
        table.header.push_back(fmt::format("d_{}", name));
        table.header.push_back(fmt::format("d_{}_lower", name));
        table.header.push_back(fmt::format("d_{}_upper", name));
    }
    for (const char* angle : {"angle_bac", "angle_cap", "angle_pab"}) table.header.emplace_back(angle);
    for (const char* col : {"excess", "slack", "verdict"}) table.header.emplace_back(col);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        std::vector<std::string> row{std::to_string(i)};
        for (const auto& d : r.distances) {
            row.push_back(csv_number(d.value));
            row.push_back(csv_number(d.lower_bound));
            row.push_back(csv_number(d.upper_bound));
        }
        for (double a : r.angles) row.push_back(csv_number(a));
        row.push_back(csv_number(r.excess));
        row.push_back(csv_number(r.slack));
        row.emplace_back(to_string(r.verdict));
        table.add_row(std::move(row));
    }
    return table;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace alexcurv
