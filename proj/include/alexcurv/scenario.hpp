#pragma once

#include "serialization.hpp"

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace alexcurv {

inline constexpr int kConfigVersion = 1;

enum class Experiment {
    check_quadruples,
    distance,
    search_violation,
    mollify_convergence,
    infsup_convergence,
    boundary_chart,
    full_pipeline
};

inline constexpr std::array<std::pair<Experiment, const char*>, 7> kExperimentNames{{
    {Experiment::check_quadruples, "check_quadruples"},
    {Experiment::distance, "distance"},
    {Experiment::search_violation, "search_violation"},
    {Experiment::mollify_convergence, "mollify_convergence"},
    {Experiment::infsup_convergence, "infsup_convergence"},
    {Experiment::boundary_chart, "boundary_chart"},
    {Experiment::full_pipeline, "full_pipeline"},
}};

inline const char* to_string(Experiment e) {
    for (const auto& [value, name] : kExperimentNames)
        if (value == e) return name;
    return "unknown";
}

inline std::optional<Experiment> parse_experiment(const std::string& name) {
    for (const auto& [value, n] : kExperimentNames)
        if (name == n) return value;
    return std::nullopt;
}

/// Parsed and validated scenario configuration.
struct ScenarioConfig {
    Json raw;
    Experiment experiment = Experiment::check_quadruples;
    std::uint64_t rng_seed = 0;
    std::optional<FunctionSpec> surface;
    std::optional<Region> region;
    std::optional<Region> domain; ///< surface domain; defaults to region
    std::optional<double> lipschitz;
    std::string output_dir;
    int jobs = 1;

    // options
    int count = 100;
    DistanceOptions distance;
    QuadrupleOptions quadruple;
    SearchOptions search;
    std::vector<Point> points;
    std::vector<double> ladder;
    RegularizationOptions regularization;
    std::optional<Json> quadrature;
    int infsup_grid_points = 64;
    int infsup_polish_iterations = 20;
    int histogram_bins = 20;
    int profile_points = 21;
    int lipschitz_samples = 4096;
};

namespace detail {

inline void require_dimension_matches(const Region& r, Eigen::Index n, const std::string& path) {
    if (r.dimension() != n)
        throw ConfigError(path, fmt::format("dimension {} does not match the surface dimension {}", r.dimension(), n));
}

inline void read_distance_options(const Json& j, const std::string& path, DistanceOptions& d) {
    using namespace json_read;
    if (const Json* v = optional_field(j, "k_max", path)) {
        d.k_max = positive_int(*v, child(path, "k_max"));
        if (d.k_max < 2) throw ConfigError(child(path, "k_max"), "must be >= 2");
    }
    if (const Json* v = optional_field(j, "m", path)) d.m = positive_int(*v, child(path, "m"));
    if (const Json* v = optional_field(j, "tol", path)) d.tol = positive(*v, child(path, "tol"));
    if (const Json* v = optional_field(j, "multistart", path)) d.multistart = positive_int(*v, child(path, "multistart"));
    if (const Json* v = optional_field(j, "max_sweeps", path)) d.max_sweeps = positive_int(*v, child(path, "max_sweeps"));
}

inline bool needs_surface(Experiment e) {
    return e != Experiment::mollify_convergence && e != Experiment::infsup_convergence;
}

} // namespace detail

/// Validates a configuration document. Errors carry the offending field path.
inline ScenarioConfig parse_scenario(const Json& raw, std::optional<Experiment> expected = std::nullopt) {
    using namespace json_read;
    ScenarioConfig cfg;
    cfg.raw = raw;
    if (!raw.is_object()) throw ConfigError("", "configuration must be a JSON object");
    const Json& version = field(raw, "version", "");
    if (!version.is_number_integer() || version.get<int>() != kConfigVersion)
        throw ConfigError("version", fmt::format("unsupported version (expected {})", kConfigVersion));

    if (const Json* e = optional_field(raw, "experiment", "")) {
        const std::string name = string(*e, "experiment");
        auto parsed = parse_experiment(name);
        if (!parsed) throw ConfigError("experiment", "unknown experiment '" + name + "'");
        if (expected && *parsed != *expected)
            throw ConfigError("experiment", fmt::format("config names '{}' but '{}' was requested", name, to_string(*expected)));
        cfg.experiment = *parsed;
    } else if (expected) {
        cfg.experiment = *expected;
    } else {
        throw ConfigError("experiment", "missing required field");
    }
    cfg.rng_seed = unsigned_int(field(raw, "rng_seed", ""), "rng_seed");
    if (const Json* o = optional_field(raw, "output", "")) cfg.output_dir = string(*o, "output");
    if (const Json* j = optional_field(raw, "jobs", "")) cfg.jobs = positive_int(*j, "jobs");

    cfg.surface = function_from_json(field(raw, "surface", ""), "surface");
    const Eigen::Index n = cfg.surface->dimension();
    cfg.region = region_from_json(field(raw, "region", ""), "region");
    detail::require_dimension_matches(*cfg.region, n, "region");
    if (const Json* d = optional_field(raw, "domain", "")) {
        cfg.domain = region_from_json(*d, "domain");
        detail::require_dimension_matches(*cfg.domain, n, "domain");
    }
    if (const Json* l = optional_field(raw, "lipschitz", "")) cfg.lipschitz = positive(*l, "lipschitz");

    static const Json empty = Json::object();
    const Json* opts_ptr = optional_field(raw, "options", "");
    const Json& opts = opts_ptr ? *opts_ptr : empty;
    const std::string op = "options";
    if (!opts.is_object()) throw ConfigError(op, "expected an object");

    if (const Json* v = optional_field(opts, "count", op)) cfg.count = positive_int(*v, child(op, "count"));
    if (const Json* d = optional_field(opts, "distance", op)) detail::read_distance_options(*d, child(op, "distance"), cfg.distance);
    cfg.quadruple.distance = cfg.distance;
    if (const Json* v = optional_field(opts, "flat_calibration", op))
        cfg.quadruple.flat_calibration = positive(*v, child(op, "flat_calibration"));
    if (const Json* v = optional_field(opts, "safety_factor", op))
        cfg.quadruple.safety_factor = positive(*v, child(op, "safety_factor"));
    cfg.search.check = cfg.quadruple;
    if (const Json* s = optional_field(opts, "search", op)) {
        const std::string sp = child(op, "search");
        if (const Json* v = optional_field(*s, "seeds", sp)) cfg.search.seeds = positive_int(*v, child(sp, "seeds"));
        if (const Json* v = optional_field(*s, "max_rounds", sp)) cfg.search.max_rounds = positive_int(*v, child(sp, "max_rounds"));
        if (const Json* v = optional_field(*s, "initial_step", sp)) cfg.search.initial_step = positive(*v, child(sp, "initial_step"));
        if (const Json* v = optional_field(*s, "min_step", sp)) cfg.search.min_step = positive(*v, child(sp, "min_step"));
    }
    if (const Json* p = optional_field(opts, "points", op)) {
        const std::string pp = child(op, "points");
        if (!p->is_array() || p->size() < 2) throw ConfigError(pp, "expected at least two points");
        for (std::size_t i = 0; i < p->size(); ++i) {
            Point q = point_of_dimension((*p)[i], n, index(pp, i));
            if (!cfg.region->contains(q)) throw ConfigError(index(pp, i), "point lies outside the region");
            cfg.points.push_back(std::move(q));
        }
    }
    if (const Json* l = optional_field(opts, "ladder", op)) {
        const std::string lp = child(op, "ladder");
        if (!l->is_array() || l->empty()) throw ConfigError(lp, "expected a non-empty array");
        for (std::size_t i = 0; i < l->size(); ++i) {
            const double v = positive((*l)[i], index(lp, i));
            if (!cfg.ladder.empty() && !(v < cfg.ladder.back())) throw ConfigError(index(lp, i), "ladder must be strictly decreasing");
            cfg.ladder.push_back(v);
        }
    }
    if (const Json* v = optional_field(opts, "probes", op)) cfg.regularization.probes = positive_int(*v, child(op, "probes"));
    if (const Json* v = optional_field(opts, "probe_paths", op)) {
        if (!v->is_number_integer() || v->get<int>() < 0) throw ConfigError(child(op, "probe_paths"), "must be a non-negative integer");
        cfg.regularization.probe_paths = v->get<int>();
    }
    if (const Json* v = optional_field(opts, "length_m", op)) cfg.regularization.length_m = positive_int(*v, child(op, "length_m"));
    if (const Json* v = optional_field(opts, "convexity_tol", op))
        cfg.regularization.convexity_tol = positive(*v, child(op, "convexity_tol"));
    if (const Json* q = optional_field(opts, "quadrature", op)) {
        (void)detail::mollifier_params_from_json(*q, 1.0, child(op, "quadrature"));
        cfg.quadrature = *q;
    }
    if (const Json* s = optional_field(opts, "inf_sup", op)) {
        const std::string sp = child(op, "inf_sup");
        if (const Json* v = optional_field(*s, "grid_points", sp)) {
            cfg.infsup_grid_points = positive_int(*v, child(sp, "grid_points"));
            if (cfg.infsup_grid_points < 3) throw ConfigError(child(sp, "grid_points"), "must be >= 3");
        }
        if (const Json* v = optional_field(*s, "polish_iterations", sp))
            cfg.infsup_polish_iterations = positive_int(*v, child(sp, "polish_iterations"));
    }
    if (const Json* v = optional_field(opts, "histogram_bins", op)) cfg.histogram_bins = positive_int(*v, child(op, "histogram_bins"));
    if (const Json* v = optional_field(opts, "profile_points", op)) {
        cfg.profile_points = positive_int(*v, child(op, "profile_points"));
        if (cfg.profile_points < 2) throw ConfigError(child(op, "profile_points"), "must be >= 2");
    }
    if (const Json* v = optional_field(opts, "lipschitz_samples", op)) {
        cfg.lipschitz_samples = positive_int(*v, child(op, "lipschitz_samples"));
        if (cfg.lipschitz_samples < 2) throw ConfigError(child(op, "lipschitz_samples"), "must be >= 2");
    }

    // Experiment-specific requirements.
    const double R = cfg.region->radius();
    switch (cfg.experiment) {
    case Experiment::distance:
        if (cfg.points.empty()) throw ConfigError(child(op, "points"), "missing required field");
        break;
    case Experiment::mollify_convergence:
    case Experiment::infsup_convergence:
        if (cfg.ladder.empty()) throw ConfigError(child(op, "ladder"), "missing required field");
        break;
    case Experiment::boundary_chart:
        if (!std::holds_alternative<BoundaryChart>(cfg.surface->family()))
            throw ConfigError("surface.family", "boundary_chart experiments need a boundary_chart surface");
        break;
    default:
        break;
    }
    const bool mollifies = cfg.experiment == Experiment::mollify_convergence || cfg.experiment == Experiment::full_pipeline;
    if (mollifies)
        for (std::size_t i = 0; i < cfg.ladder.size(); ++i)
            if (!(cfg.ladder[i] < R / 2.0))
                throw ConfigError(index(child(op, "ladder"), i),
                                  fmt::format("mollifier radius {} must be below half the region radius ({})", cfg.ladder[i], R / 2.0));
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path, std::optional<Experiment> expected = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    Json raw;
    try {
        raw = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(raw, expected);
}

// =============================================================================================
// Convergence ladders
// =============================================================================================

enum class Regularizer { mollify, inf_sup };

struct ConvergenceResult {
    Regularizer kind = Regularizer::mollify;
    std::vector<RegularizationReport> levels;
    bool sup_dev_strictly_decreasing = false;
    bool sup_dev_within_lipschitz_level = false; ///< sup_dev <= L * level on every level
    std::optional<bool> grad_dev_decreasing;     ///< C^{1,1} inputs only
    bool length_dev_decreasing = false;
    int convexity_violations = 0;
    double max_lip_ratio = 0.0;
    std::optional<bool> second_diff_within_bound; ///< inf-sup only
};

/// Absolute floor under which consecutive levels count as equal.
inline constexpr double kMonotoneFloor = 1e-9;

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

/// Non-increasing up to values below `floor`.
inline bool non_increasing(const std::vector<double>& v, double floor = kMonotoneFloor) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1] || v[i] <= floor)) return false;
    return true;
}

struct LadderOptions {
    RegularizationOptions report;
    MollifierParams quadrature = MollifierParams::standard(0.1, 1); ///< delta replaced per level
    bool custom_quadrature = false;
    int grid_points = 64;
    int polish_iterations = 20;
    std::optional<double> lipschitz; ///< inf-sup window scale; estimated when absent
};

/// One regularisation report per ladder level, with monotonicity flags per column.
inline ConvergenceResult convergence_experiment(const FunctionSpec& f, const Region& region,
                                                const std::vector<double>& ladder, Regularizer kind,
                                                const LadderOptions& opts, std::uint64_t rng_seed) {
    if (ladder.empty()) throw DomainError("convergence_experiment: ladder must be non-empty");
    if (!strictly_decreasing(ladder)) throw DomainError("convergence_experiment: ladder must be strictly decreasing");
    ConvergenceResult out;
    out.kind = kind;
    const std::uint64_t report_seed = derive_seed(rng_seed, "regularization");
    const Eigen::Index n = f.dimension();
    std::optional<double> L = opts.lipschitz;
    for (double level : ladder) {
        FunctionSpec g = [&] {
            if (kind == Regularizer::mollify) {
                MollifierParams p = opts.custom_quadrature ? opts.quadrature : MollifierParams::standard(level, n);
                p.delta = level;
                return mollify(f, p);
            }
            if (!L) L = lipschitz_estimate(f, region, 4096, derive_seed(rng_seed, "lipschitz"));
            InfSupParams p;
            p.epsilon = level;
            p.lipschitz = *L;
            p.grid_points = opts.grid_points;
            p.polish_iterations = opts.polish_iterations;
            p.search_domain = Region(region.center(), inf_sup_required_radius(region, level, *L) * (1.0 + 1e-9));
            return inf_sup_convolution(f, p);
        }();
        out.levels.push_back(regularization_report(f, g, region, report_seed, opts.report));
    }
    std::vector<double> sup, grad, length;
    out.sup_dev_within_lipschitz_level = true;
    for (const auto& r : out.levels) {
        sup.push_back(r.sup_dev);
        length.push_back(r.length_dev);
        if (r.grad_dev) grad.push_back(*r.grad_dev);
        out.convexity_violations += r.convexity.violations;
        out.max_lip_ratio = std::max(out.max_lip_ratio, r.lip_ratio);
        if (!(r.sup_dev <= std::max(1.0, r.lipschitz_original) * r.level)) out.sup_dev_within_lipschitz_level = false;
        if (r.second_diff_max) {
            const bool within = *r.second_diff_max <= *r.second_diff_bound * (1.0 + 1e-3);
            out.second_diff_within_bound = out.second_diff_within_bound.value_or(true) && within;
        }
    }
    out.sup_dev_strictly_decreasing = strictly_decreasing(sup);
    out.length_dev_decreasing = non_increasing(length);
    if (grad.size() == out.levels.size()) out.grad_dev_decreasing = non_increasing(grad);
    return out;
}

inline CsvTable convergence_table(const ConvergenceResult& r) {
    CsvTable t;
    t.header = {"level", "sup_dev", "lip_ratio", "convexity_gap", "grad_dev", "length_dev", "second_diff_max"};
    for (const auto& l : r.levels) {
        t.add_row({csv_number(l.level), csv_number(l.sup_dev), csv_number(l.lip_ratio), csv_number(l.convexity.worst_gap),
                   l.grad_dev ? csv_number(*l.grad_dev) : "", csv_number(l.length_dev),
                   l.second_diff_max ? csv_number(*l.second_diff_max) : ""});
    }
    return t;
}

inline Json to_json(const ConvergenceResult& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels) levels.push_back(to_json(l));
    Json flags{{"sup_dev_strictly_decreasing", r.sup_dev_strictly_decreasing},
               {"sup_dev_within_lipschitz_level", r.sup_dev_within_lipschitz_level},
               {"length_dev_decreasing", r.length_dev_decreasing},
               {"convexity_violations", r.convexity_violations},
               {"max_lip_ratio", finite_or_null(r.max_lip_ratio)}};
    flags["grad_dev_decreasing"] = r.grad_dev_decreasing ? Json(*r.grad_dev_decreasing) : Json(nullptr);
    flags["second_diff_within_bound"] = r.second_diff_within_bound ? Json(*r.second_diff_within_bound) : Json(nullptr);
    return {{"regularizer", r.kind == Regularizer::mollify ? "mollify" : "inf_sup"},
            {"levels", std::move(levels)},
            {"monotonicity", std::move(flags)}};
}

// =============================================================================================
// Plot data
// =============================================================================================

/// Equal-width histogram of the excess values; non-finite values go to a final nan row so the
/// counts always add up to the number of reports.
inline CsvTable excess_histogram(const std::vector<QuadrupleReport>& reports, int bins) {
    CsvTable t;
    t.header = {"bin_left", "bin_right", "count"};
    std::vector<double> values;
    int non_finite = 0;
    for (const auto& r : reports) {
        if (std::isfinite(r.excess))
            values.push_back(r.excess);
        else
            ++non_finite;
    }
    if (!values.empty()) {
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        double hi = *hi_it;
        if (!(hi > lo)) hi = lo + 1.0;
        const double width = (hi - lo) / bins;
        std::vector<int> counts(static_cast<std::size_t>(bins), 0);
        for (double v : values) {
            const int b = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
            ++counts[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < bins; ++b)
            t.add_row({csv_number(lo + b * width), csv_number(b + 1 == bins ? hi : lo + (b + 1) * width),
                       std::to_string(counts[static_cast<std::size_t>(b)])});
    }
    if (non_finite > 0) t.add_row({"nan", "nan", std::to_string(non_finite)});
    return t;
}

inline CsvTable distance_table(const DistanceMatrix& m) {
    CsvTable t;
    t.header = {"i", "j", "value", "lower", "upper", "k", "m", "converged"};
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            const auto& d = m(i, j);
            t.add_row({std::to_string(i), std::to_string(j), csv_number(d.value), csv_number(d.lower_bound),
                       csv_number(d.upper_bound), std::to_string(d.breakpoints), std::to_string(d.subdivision),
                       d.converged ? "true" : "false"});
        }
    return t;
}

inline Json to_json(const DistanceMatrix& m) {
    Json values = Json::array();
    Json entries = Json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.size(); ++j) {
            row.push_back(m.value(i, j));
            if (i < j) {
                Json e = to_json(m(i, j));
                e["i"] = i;
                e["j"] = j;
                entries.push_back(std::move(e));
            }
        }
        values.push_back(std::move(row));
    }
    return {{"size", m.size()}, {"values", std::move(values)}, {"entries", std::move(entries)}};
}

// =============================================================================================
// Runs
// =============================================================================================

struct RunReport {
    Json config;                              ///< echo of the validated configuration
    Json results = Json::object();            ///< one block per experiment unit
    std::map<std::string, CsvTable> tables;   ///< file name -> table
    Json timings = Json::object();            ///< seconds per unit; written to timings.json
    std::vector<std::string> manifest;        ///< every file written, sorted
    int status = 0;                           ///< 0 on completion
    std::string error;

    Json to_json() const {
        Json out{{"config", config}, {"results", results}, {"manifest", manifest}, {"status", status == 0 ? "completed" : "failed"}};
        if (!error.empty()) out["error"] = error;
        return out;
    }
};

/// Writes every table as CSV with a header row and returns the file names.
inline std::vector<std::string> emit_plot_data(const RunReport& report, const std::filesystem::path& out_dir) {
    if (report.tables.empty()) throw DomainError("emit_plot_data: report has no tabular blocks");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> files;
    for (const auto& [name, table] : report.tables) {
        write_text((out_dir / name).string(), table.str());
        files.push_back(name);
    }
    return files;
}

namespace detail {

class UnitTimer {
  public:
    UnitTimer(Json& timings, std::string name) : timings_(timings), name_(std::move(name)) {}
    ~UnitTimer() { timings_[name_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }
    UnitTimer(const UnitTimer&) = delete;
    UnitTimer& operator=(const UnitTimer&) = delete;

  private:
    Json& timings_;
    std::string name_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline GraphSurface build_surface(const ScenarioConfig& cfg) {
    const Region dom = cfg.domain ? *cfg.domain : (domain(*cfg.surface) ? *domain(*cfg.surface) : *cfg.region);
    const double L = cfg.lipschitz ? *cfg.lipschitz
                                   : lipschitz_estimate(*cfg.surface, dom, cfg.lipschitz_samples, derive_seed(cfg.rng_seed, "lipschitz"));
    return GraphSurface(*cfg.surface, dom, L);
}

inline Json surface_json(const GraphSurface& s) {
    return {{"domain", to_json(s.domain())},
            {"lipschitz_bound", s.lipschitz_bound()},
            {"bilipschitz_bound", s.bilipschitz_bound()}};
}

inline void run_quadruples(const ScenarioConfig& cfg, const GraphSurface& surface, const std::string& prefix,
                           RunReport& report) {
    UnitTimer timer(report.timings, prefix + "quadruples");
    const auto agg = sample_quadruple_condition(surface, *cfg.region, cfg.count, cfg.quadruple,
                                                derive_seed(cfg.rng_seed, "quadruples"), cfg.jobs);
    report.results[prefix + "quadruples"] = to_json(agg);
    report.tables[prefix + "quads.csv"] = quadruple_table(agg.reports);
    report.tables[prefix + "excess_histogram.csv"] = excess_histogram(agg.reports, cfg.histogram_bins);
}

inline std::vector<Point> matrix_points(const ScenarioConfig& cfg) {
    if (!cfg.points.empty()) return cfg.points;
    Rng rng(derive_seed(cfg.rng_seed, "matrix-points"));
    std::vector<Point> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(sample_in_region(rng, *cfg.region));
    return pts;
}

inline void run_distance(const ScenarioConfig& cfg, const GraphSurface& surface, const std::string& prefix,
                         RunReport& report) {
    UnitTimer timer(report.timings, prefix + "distance_matrix");
    DistanceOptions opts = cfg.distance;
    opts.rng_seed = derive_seed(cfg.rng_seed, "distances");
    const auto matrix = distance_matrix(surface, matrix_points(cfg), opts, cfg.jobs);
    report.results[prefix + "distance_matrix"] = to_json(matrix);
    report.tables[prefix + "distance_matrix.csv"] = distance_table(matrix);
}

inline LadderOptions ladder_options(const ScenarioConfig& cfg) {
    LadderOptions lo;
    lo.report = cfg.regularization;
    lo.report.jobs = cfg.jobs;
    if (cfg.quadrature) {
        lo.quadrature = mollifier_params_from_json(*cfg.quadrature, 1.0, "options.quadrature");
        lo.custom_quadrature = true;
    }
    lo.grid_points = cfg.infsup_grid_points;
    lo.polish_iterations = cfg.infsup_polish_iterations;
    lo.lipschitz = cfg.lipschitz;
    return lo;
}

inline void run_ladder(const ScenarioConfig& cfg, Regularizer kind, const std::string& name, RunReport& report) {
    UnitTimer timer(report.timings, name);
    const auto result = convergence_experiment(*cfg.surface, *cfg.region, cfg.ladder, kind, ladder_options(cfg), cfg.rng_seed);
    report.results[name] = to_json(result);
    report.tables[name + ".csv"] = convergence_table(result);
}

inline void run_experiment(const ScenarioConfig& cfg, RunReport& report) {
    switch (cfg.experiment) {
    case Experiment::check_quadruples: {
        const GraphSurface surface = build_surface(cfg);
        report.results["surface"] = surface_json(surface);
        run_quadruples(cfg, surface, "check_quadruples_", report);
        break;
    }
    case Experiment::distance: {
        const GraphSurface surface = build_surface(cfg);
        report.results["surface"] = surface_json(surface);
        run_distance(cfg, surface, "", report);
        break;
    }
    case Experiment::search_violation: {
        const GraphSurface surface = build_surface(cfg);
        report.results["surface"] = surface_json(surface);
        UnitTimer timer(report.timings, "search_violation");
        const auto result = search_violation(surface, *cfg.region, cfg.search, derive_seed(cfg.rng_seed, "search"));
        report.results["search_violation"] = {{"best", to_json(result.best)},
                                              {"objective", finite_or_null(result.objective)},
                                              {"evaluations", result.evaluations},
                                              {"violations_found", result.violations.size()}};
        report.tables["search_violation_violations.csv"] = quadruple_table(result.violations);
        report.tables["search_violation_best.csv"] = quadruple_table({result.best});
        break;
    }
    case Experiment::mollify_convergence:
        run_ladder(cfg, Regularizer::mollify, "mollify_convergence", report);
        break;
    case Experiment::infsup_convergence:
        run_ladder(cfg, Regularizer::inf_sup, "infsup_convergence", report);
        break;
    case Experiment::boundary_chart: {
        const GraphSurface surface = build_surface(cfg);
        report.results["surface"] = surface_json(surface);
        UnitTimer timer(report.timings, "boundary_chart");
        const auto& chart = *std::get<BoundaryChart>(cfg.surface->family()).chart;
        const Eigen::Index n = cfg.surface->dimension();
        CsvTable profile;
        for (Eigen::Index i = 0; i < n; ++i) profile.header.push_back(fmt::format("x{}", i));
        profile.header.push_back("height");
        const double R = cfg.region->radius();
        for (Eigen::Index axis = 0; axis < n; ++axis) {
            for (int s = 0; s < cfg.profile_points; ++s) {
                Point x = cfg.region->center();
                x[axis] += -R + 2.0 * R * s / (cfg.profile_points - 1);
                x = cfg.region->project(x);
                std::vector<std::string> row;
                for (Eigen::Index i = 0; i < n; ++i) row.push_back(csv_number(x[i]));
                row.push_back(csv_number(evaluate(*cfg.surface, x)));
                profile.add_row(std::move(row));
            }
        }
        report.tables["boundary_chart_profile.csv"] = std::move(profile);
        const auto convexity = convexity_check(*cfg.surface, *cfg.region, cfg.regularization.probes,
                                               2.0 * chart.bisection_tol(), derive_seed(cfg.rng_seed, "convexity"));
        report.results["boundary_chart"] = {{"up_direction", to_json(chart.up_direction())},
                                            {"chart_radius", chart.chart_radius()},
                                            {"bisection_tol", chart.bisection_tol()},
                                            {"convexity", to_json(convexity)}};
        run_quadruples(cfg, surface, "boundary_chart_", report);
        break;
    }
    case Experiment::full_pipeline: {
        const GraphSurface surface = build_surface(cfg);
        report.results["surface"] = surface_json(surface);
        run_distance(cfg, surface, "full_pipeline_", report);
        run_quadruples(cfg, surface, "full_pipeline_", report);
        if (!cfg.ladder.empty()) run_ladder(cfg, Regularizer::mollify, "full_pipeline_regularization", report);
        break;
    }
    }
}

} // namespace detail

/// Runs the configured experiment and writes report.json, timings.json and one CSV per table
/// into the output directory. Numeric failures produce a partial report with status 1.
inline RunReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    RunReport report;
    report.config = cfg.raw;
    report.config["experiment"] = to_string(cfg.experiment);
    report.config["rng_seed"] = cfg.rng_seed;
    report.config.erase("jobs");
    report.config.erase("output");
    try {
        detail::run_experiment(cfg, report);
    } catch (const Error& e) {
        report.status = 1;
        report.error = e.what();
    } catch (const std::exception& e) {
        report.status = 1;
        report.error = std::string("internal error: ") + e.what();
    }
    std::filesystem::create_directories(out_dir);
    if (!report.tables.empty()) report.manifest = emit_plot_data(report, out_dir);
    report.manifest.push_back("report.json");
    report.manifest.push_back("timings.json");
    std::sort(report.manifest.begin(), report.manifest.end());
    write_text((out_dir / "timings.json").string(), report.timings.dump(2) + "\n");
    write_text((out_dir / "report.json").string(), report.to_json().dump(2) + "\n");
    return report;
}

} // namespace alexcurv
