/// @file run.hpp
/// @brief Run orchestration for the CLI: time-series and snapshot CSV output,
///        step-bound reporting, the convergence-study driver, and the
///        operator-identity printer. Exit codes signal invariant violations.

#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kwc/analysis.hpp"
#include "kwc/config.hpp"
#include "kwc/discrete_ops.hpp"
#include "kwc/field.hpp"
#include "kwc/model.hpp"
#include "kwc/presets.hpp"
#include "kwc/stepper.hpp"
#include "kwc/verify.hpp"

namespace kwc {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int order_floor = 1;    ///< convergence order below the floor
inline constexpr int nonconvergence = 2; ///< nonlinear solve gave up
inline constexpr int invariant = 3;      ///< range or dissipation check failed
inline constexpr int config = 64;        ///< bad configuration
} // namespace exit_code

struct TimeSeriesRow {
    int j = 0;
    double t = 0.0;
    double energy = 0.0;
    double min_eta = 0.0, max_eta = 0.0;
    double min_theta = 0.0, max_theta = 0.0;
    int theta_iters = 0;
    double dissipation_slack = 0.0;
};

inline constexpr const char* series_header =
    "j,t,energy,minH,maxH,minTheta,maxTheta,theta_iters,dissipation_slack";

namespace detail {

/// Shortest decimal that round-trips a double (17 significant digits).
inline std::string num17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline TimeSeriesRow make_row(const GridSpec& g, const SimState& s, const StepReport* rep) {
    TimeSeriesRow row;
    row.j = s.step;
    row.t = g.time_at(s.step);
    row.energy = s.energy;
    row.min_eta = row.max_eta = s.eta[0];
    row.min_theta = row.max_theta = s.theta[0];
    for (int k = 1; k <= g.K; ++k) {
        row.min_eta = std::min(row.min_eta, s.eta[k]);
        row.max_eta = std::max(row.max_eta, s.eta[k]);
        row.min_theta = std::min(row.min_theta, s.theta[k]);
        row.max_theta = std::max(row.max_theta, s.theta[k]);
    }
    if (rep) {
        row.theta_iters = rep->theta_iterations;
        row.dissipation_slack = rep->dissipation_slack;
    }
    return row;
}

inline void write_series_row(std::ostream& out, const TimeSeriesRow& r) {
    out << r.j << ',' << num17(r.t) << ',' << num17(r.energy) << ',' << num17(r.min_eta) << ','
        << num17(r.max_eta) << ',' << num17(r.min_theta) << ',' << num17(r.max_theta) << ','
        << r.theta_iters << ',' << num17(r.dissipation_slack) << '\n';
}

inline void write_snapshot(const std::filesystem::path& path, const GridSpec& g, const Field& f) {
    std::ofstream out(path);
    out << "x,value\n";
    for (int k = 0; k <= g.K; ++k) out << num17(g.x_at(k)) << ',' << num17(f[k]) << '\n';
}

} // namespace detail

/// Parse a series.csv written by run_simulation (used for round-trip checks
/// and post-processing).
inline std::vector<TimeSeriesRow> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != series_header)
        throw std::runtime_error("'" + path + "' has an unexpected header");
    std::vector<TimeSeriesRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 9> cells;
        std::stringstream ss(line);
        for (auto& cell : cells)
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("'" + path + "' has a short row");
        TimeSeriesRow r;
        r.j = std::stoi(cells[0]);
        r.t = std::stod(cells[1]);
        r.energy = std::stod(cells[2]);
        r.min_eta = std::stod(cells[3]);
        r.max_eta = std::stod(cells[4]);
        r.min_theta = std::stod(cells[5]);
        r.max_theta = std::stod(cells[6]);
        r.theta_iters = std::stoi(cells[7]);
        r.dissipation_slack = std::stod(cells[8]);
        rows.push_back(r);
    }
    return rows;
}

/// Print both step-size bounds and whether the configured step honors them.
inline void write_bounds_report(const ResolvedRun& r, std::ostream& out) {
    const StabilityBounds b = stability_bounds(r.params, r.mobility, r.c1, r.grid.dx);
    out << "dt                 = " << detail::num17(r.grid.dt) << '\n';
    out << "dt_existence_bound = " << detail::num17(b.dt_exist) << '\n';
    out << "a                  = " << detail::num17(b.a) << '\n';
    out << "dt_error_bound     = " << detail::num17(b.dt_error) << '\n';
    out << "c1                 = " << detail::num17(b.c1) << '\n';
    out << "dt < dt_existence_bound: "
        << (r.grid.dt < b.dt_exist ? "ok" : "violated (sufficient condition only; proceeding)")
        << '\n';
    out << "dt < dt_error_bound: " << (r.grid.dt < b.dt_error ? "ok" : "violated") << '\n';
}

inline int print_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        write_bounds_report(resolve(cfg), out);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::config;
    }
    return exit_code::ok;
}

/// Integrate the configured run, writing series.csv and optional snapshots.
/// Returns 0 when every structural check passed.
inline int run_simulation(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    ResolvedRun r{reference_params(), GridSpec{}, MobilityField::constant(1.0), Field{}, Field{}};
    try {
        r = resolve(cfg);
        if (r.grid.dt >= dt_existence_bound(r.params, r.grid.dx) &&
            !cfg.solver.warn_only_on_exist_cond)
            throw ConfigError("dt violates the solvability bound and "
                              "solver.warn_only_on_exist_cond is false");
        std::filesystem::create_directories(cfg.output_dir);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::config;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config: cannot create output directory: " << e.what() << '\n';
        return exit_code::config;
    }
    write_bounds_report(r, log);

    const std::filesystem::path dir(cfg.output_dir);
    std::ofstream series(dir / "series.csv");
    series << series_header << '\n';

    SimState state = make_initial_state(r.params, r.grid, r.eta0, r.theta0);
    detail::write_series_row(series, detail::make_row(r.grid, state, nullptr));
    auto snapshot = [&](const SimState& s) {
        detail::write_snapshot(dir / ("snap_H_" + std::to_string(s.step) + ".csv"), r.grid, s.eta);
        detail::write_snapshot(dir / ("snap_Theta_" + std::to_string(s.step) + ".csv"), r.grid,
                               s.theta);
    };
    if (cfg.output_stride > 0) snapshot(state);

    bool all_ok = true;
    double worst_violation = 0.0, worst_slack = 0.0;
    int worst_step = -1;
    for (int j = 0; j < r.grid.N; ++j) {
        try {
            auto [next, rep] = advance(r.params, r.grid, r.mobility, state, cfg.solver);
            state = std::move(next);
            detail::write_series_row(series, detail::make_row(r.grid, state, &rep));
            if (cfg.output_stride > 0 &&
                (state.step % cfg.output_stride == 0 || state.step == r.grid.N))
                snapshot(state);
            if (!rep.range_ok || !rep.dissipation_ok) {
                all_ok = false;
                if (rep.range_violation >= worst_violation) {
                    worst_violation = rep.range_violation;
                    worst_step = state.step;
                }
                worst_slack = std::max(worst_slack, rep.dissipation_slack);
            }
        } catch (const NonconvergenceError& e) {
            err << "step " << (j + 1) << ": " << e.what() << '\n';
            return exit_code::nonconvergence;
        }
    }
    log << "finished " << r.grid.N << " steps, final energy " << detail::num17(state.energy)
        << '\n';
    if (!all_ok) {
        err << "invariant violation: worst range overshoot " << detail::num17(worst_violation)
            << " (step " << worst_step << "), worst dissipation slack "
            << detail::num17(worst_slack) << '\n';
        return exit_code::invariant;
    }
    return exit_code::ok;
}

/// Run the refinement study configured under converge.* and write
/// convergence.csv next to the usual outputs.
inline int run_convergence(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
    ConvergenceReport rep;
    try {
        if (cfg.converge.levels.size() < 3)
            throw ConfigError("converge.levels needs at least 3 grid sizes to fit an order");
        const ResolvedRun r = resolve(cfg);
        // initial data as functions of x: presets carry their closed forms,
        // custom configs reuse the expressions
        InitialData ic;
        if (cfg.preset != 0) {
            const int preset = cfg.preset;
            ic.eta0 = [preset](double x) { return preset_eta0(preset, x); };
            ic.theta0 = [preset](double x) { return preset_theta0(preset, x); };
        } else {
            if (cfg.eta_expr.empty() || cfg.theta_expr.empty())
                throw ConfigError("converge with custom data needs ic.eta_expr and ic.theta_expr");
            const Expression ee(cfg.eta_expr), te(cfg.theta_expr);
            ic.eta0 = [ee](double x) { return ee(0.0, x); };
            ic.theta0 = [te](double x) { return te(0.0, x); };
        }
        AngleSolveConfig scfg = cfg.solver;
        scfg.tol_abs = std::max(scfg.tol_abs, cfg.converge.tol_abs);
        rep = convergence_study(r.params, r.mobility, ic, cfg.converge.levels,
                                cfg.converge.dt_over_dx, cfg.converge.horizon, scfg,
                                cfg.converge.ref_factor);
        std::filesystem::create_directories(cfg.output_dir);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_code::config;
    } catch (const ExprError& e) {
        err << e.what() << '\n';
        return exit_code::config;
    } catch (const std::invalid_argument& e) {
        err << "config: " << e.what() << '\n';
        return exit_code::config;
    } catch (const NonconvergenceError& e) {
        err << e.what() << '\n';
        return exit_code::nonconvergence;
    }

    std::ofstream csv(std::filesystem::path(cfg.output_dir) / "convergence.csv");
    csv << "level,K,dt,e_eta,e_theta\n";
    for (size_t i = 0; i < rep.levels.size(); ++i) {
        const auto& lv = rep.levels[i];
        csv << i << ',' << lv.K << ',' << detail::num17(lv.dt) << ','
            << detail::num17(lv.err_eta) << ',' << detail::num17(lv.err_theta) << '\n';
    }

    if (rep.degenerate) {
        log << "errors at machine zero; order fit skipped\n";
        return exit_code::ok;
    }
    log << "fitted order (eta " << rep.order_eta << ", theta " << rep.order_theta
        << "; two finest levels " << rep.pairwise_order_eta << ", " << rep.pairwise_order_theta
        << "; reference K " << rep.reference_K << ")\n";
    if (rep.order_eta < cfg.converge.order_floor || rep.order_theta < cfg.converge.order_floor) {
        err << "fitted order below the floor " << cfg.converge.order_floor << '\n';
        return exit_code::order_floor;
    }
    return exit_code::ok;
}

/// Execute the discrete-calculus identity suite and print one line per check.
inline int verify_operator_identities(std::ostream& out) {
    const std::vector<int> sizes = {3, 7, 16};
    const auto checks = run_operator_identity_suite(sizes, 1000);
    bool all = true;
    for (const auto& c : checks) {
        out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (worst relative defect "
            << detail::num17(c.worst_rel) << ")\n";
        all = all && c.pass;
    }
    return all ? exit_code::ok : exit_code::invariant;
}

} // namespace kwc
