// Command-line front end: run the scheme, print the step-size bounds, run a
// refinement study, or execute the operator-identity suite.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kwc/config.hpp"
#include "kwc/run.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::string> preset;
    std::optional<int> K;
    std::optional<double> dt;
    std::optional<int> steps;
    std::optional<std::string> out_dir;
    std::optional<int> stride;
    std::optional<std::string> method;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "flat key=value config file");
    cmd->add_option("--preset", o.preset, "initial data: example1|example2|example3|custom");
    cmd->add_option("--K", o.K, "number of cells");
    cmd->add_option("--dt", o.dt, "time step");
    cmd->add_option("--steps", o.steps, "number of steps");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--stride", o.stride, "snapshot stride (0 = none)");
    cmd->add_option("--method", o.method, "angle solver: newton|picard");
}

int load_config(const CommonOpts& o, kwc::RunConfig& cfg) {
    try {
        if (!o.config_path.empty()) cfg = kwc::parse_config_file(o.config_path);
        if (o.preset) {
            if (*o.preset == "custom") cfg.preset = 0;
            else if (*o.preset == "example1") cfg.preset = 1;
            else if (*o.preset == "example2") cfg.preset = 2;
            else if (*o.preset == "example3") cfg.preset = 3;
            else throw kwc::ConfigError("unknown preset '" + *o.preset + "'");
        }
        if (o.K) cfg.grid_K = *o.K;
        if (o.dt) cfg.grid_dt = *o.dt;
        if (o.steps) cfg.grid_N = *o.steps;
        if (o.out_dir) cfg.output_dir = *o.out_dir;
        if (o.stride) cfg.output_stride = *o.stride;
        if (o.method) cfg.solver.method = kwc::angle_method_from_string(*o.method);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kwc::exit_code::config;
    }
    return kwc::exit_code::ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure-preserving finite differences for the 1D grain-boundary system"};
    app.require_subcommand(1);

    CommonOpts run_opts, bounds_opts, conv_opts;
    std::vector<int> conv_levels;
    double conv_floor = -1.0;

    CLI::App* run_cmd = app.add_subcommand("run", "integrate and write series/snapshot CSVs");
    add_common(run_cmd, run_opts);
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "print both time-step bounds");
    add_common(bounds_cmd, bounds_opts);
    CLI::App* conv_cmd = app.add_subcommand("converge", "refinement study with order fit");
    add_common(conv_cmd, conv_opts);
    conv_cmd->add_option("--levels", conv_levels, "grid sizes, e.g. 25 50 100 200");
    conv_cmd->add_option("--floor", conv_floor, "required fitted order");
    CLI::App* verify_cmd =
        app.add_subcommand("verify-ops", "run the discrete-calculus identity suite");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        kwc::RunConfig cfg;
        if (int rc = load_config(run_opts, cfg)) return rc;
        return kwc::run_simulation(cfg, std::cout, std::cerr);
    }
    if (bounds_cmd->parsed()) {
        kwc::RunConfig cfg;
        if (int rc = load_config(bounds_opts, cfg)) return rc;
        return kwc::print_bounds(cfg, std::cout, std::cerr);
    }
    if (conv_cmd->parsed()) {
        kwc::RunConfig cfg;
        if (int rc = load_config(conv_opts, cfg)) return rc;
        if (!conv_levels.empty()) cfg.converge.levels = conv_levels;
        if (conv_floor >= 0.0) cfg.converge.order_floor = conv_floor;
        return kwc::run_convergence(cfg, std::cout, std::cerr);
    }
    if (verify_cmd->parsed()) return kwc::verify_operator_identities(std::cout);
    return kwc::exit_code::config;
}
