#include <alexcurv.hpp>

#include <CLI11.hpp>
#include <fmt/core.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitRunFailure = 1;
constexpr int kExitInvalidConfig = 2;

struct Subcommand {
    const char* name;
    alexcurv::Experiment experiment;
    const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"check-quadruples", alexcurv::Experiment::check_quadruples, "Sample quadruples and test the angle-sum condition"},
    {"distance", alexcurv::Experiment::distance, "Intrinsic distance matrix between configured points"},
    {"search-violation", alexcurv::Experiment::search_violation, "Search for a quadruple with certified positive excess"},
    {"mollify", alexcurv::Experiment::mollify_convergence, "Mollification convergence ladder"},
    {"inf-sup", alexcurv::Experiment::infsup_convergence, "Inf-sup convolution convergence ladder"},
    {"boundary-chart", alexcurv::Experiment::boundary_chart, "Lower boundary chart profile and checks"},
    {"pipeline", alexcurv::Experiment::full_pipeline, "Distances, quadruples and regularization in one run"},
};

alexcurv::Json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw alexcurv::ConfigError("", "cannot open config file '" + path + "'");
    try {
        return alexcurv::Json::parse(in);
    } catch (const alexcurv::Json::parse_error& e) {
        throw alexcurv::ConfigError("", std::string("malformed JSON: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of the quadruple condition on convex graph surfaces"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    app.add_option("--config", config_path, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::optional<alexcurv::Experiment> selected;
    for (const auto& sub : kSubcommands) {
        auto* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->callback([&selected, e = sub.experiment] { selected = e; });
    }
    CLI11_PARSE(app, argc, argv);

    alexcurv::ScenarioConfig cfg;
    try {
        alexcurv::Json raw = read_config(config_path);
        if (raw.is_object()) {
            if (seed) raw["rng_seed"] = *seed;
            if (jobs) raw["jobs"] = *jobs;
            if (!out_dir.empty()) raw["output"] = out_dir;
        }
        cfg = alexcurv::parse_scenario(raw, selected);
    } catch (const alexcurv::ConfigError& e) {
        fmt::print(stderr, "invalid config: {}\n", e.what());
        return kExitInvalidConfig;
    } catch (const alexcurv::Error& e) {
        fmt::print(stderr, "invalid config: {}\n", e.what());
        return kExitInvalidConfig;
    }
    if (cfg.output_dir.empty()) {
        fmt::print(stderr, "invalid config: output: no output directory (use --out or the \"output\" field)\n");
        return kExitInvalidConfig;
    }

    const alexcurv::RunReport report = alexcurv::run_scenario(cfg, cfg.output_dir);
    if (report.status != 0) {
        fmt::print(stderr, "run failed: {}\n", report.error);
        return kExitRunFailure;
    }
    for (const auto& file : report.manifest) fmt::print("{}/{}\n", cfg.output_dir, file);
    return 0;
}
