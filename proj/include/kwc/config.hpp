/// @file config.hpp
/// @brief Flat key-value run configuration: parsing, defaults, and resolution
///        into concrete simulation inputs.
///
/// Config files are plain text, one `key = value` per line, '#' comments.
/// Unknown keys are rejected. See the README for the full key list.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kwc/expr.hpp"
#include "kwc/field.hpp"
#include "kwc/model.hpp"
#include "kwc/presets.hpp"
#include "kwc/stepper.hpp"

namespace kwc {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

struct ConvergeConfig {
    std::vector<int> levels = {25, 50, 100, 200};
    double dt_over_dx = 0.1;
    double horizon = 0.5;
    double order_floor = 0.9;
    int ref_factor = 4;
    double tol_abs = 1e-9; ///< residual tolerance for study runs (fine grids)
};

struct RunConfig {
    ModelParams params = reference_params();
    int preset = 1; ///< 1..3, or 0 for custom initial data
    std::optional<int> grid_K;
    std::optional<double> grid_dt;
    std::optional<int> grid_N;
    std::string eta_expr, theta_expr; ///< custom initial data as expressions of x
    std::string eta_file, theta_file; ///< or tabulated node values, one per line
    std::string mobility_expr;        ///< expression of (t, x); empty = constant delta0
    std::optional<double> mobility_lipschitz;
    AngleSolveConfig solver;
    std::string output_dir = "out";
    int output_stride = 0; ///< snapshot every this many steps; 0 = none
    std::optional<double> c1;
    ConvergeConfig converge;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": '" + v + "'");
    }
    if (used != v.size()) throw ConfigError("bad number for " + key + ": '" + v + "'");
    return out;
}

inline int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    const int i = static_cast<int>(std::llround(d));
    if (static_cast<double>(i) != d) throw ConfigError(key + " must be an integer");
    return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + " must be true or false");
}

inline std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_int(key, item));
    }
    if (out.empty()) throw ConfigError(key + " must be a comma-separated list of integers");
    return out;
}

} // namespace detail

/// Parse a config stream into a RunConfig, overriding the defaults.
inline RunConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError("duplicate key " + key);
    }

    RunConfig cfg;
    double eps = cfg.params.eps, delta0 = cfg.params.delta0, c = cfg.params.c;
    double kappa0 = cfg.params.kappa0, kappa = cfg.params.kappa, nu = cfg.params.nu;

    auto take = [&](const char* key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("params.eps")) eps = detail::to_double("params.eps", *v);
    if (auto v = take("params.delta0")) delta0 = detail::to_double("params.delta0", *v);
    if (auto v = take("params.c")) c = detail::to_double("params.c", *v);
    if (auto v = take("params.kappa0")) kappa0 = detail::to_double("params.kappa0", *v);
    if (auto v = take("params.kappa")) kappa = detail::to_double("params.kappa", *v);
    if (auto v = take("params.nu")) nu = detail::to_double("params.nu", *v);
    try {
        cfg.params = ModelParams(eps, delta0, c, kappa0, kappa, nu);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (auto v = take("ic.preset")) {
        if (*v == "custom") cfg.preset = 0;
        else if (*v == "example1" || *v == "1") cfg.preset = 1;
        else if (*v == "example2" || *v == "2") cfg.preset = 2;
        else if (*v == "example3" || *v == "3") cfg.preset = 3;
        else throw ConfigError("unknown ic.preset '" + *v + "'");
    }
    if (auto v = take("ic.eta_expr")) cfg.eta_expr = *v;
    if (auto v = take("ic.theta_expr")) cfg.theta_expr = *v;
    if (auto v = take("ic.eta_file")) cfg.eta_file = *v;
    if (auto v = take("ic.theta_file")) cfg.theta_file = *v;

    if (auto v = take("grid.K")) cfg.grid_K = detail::to_int("grid.K", *v);
    if (auto v = take("grid.dt")) cfg.grid_dt = detail::to_double("grid.dt", *v);
    if (auto v = take("grid.N")) cfg.grid_N = detail::to_int("grid.N", *v);

    if (auto v = take("mobility.expr")) cfg.mobility_expr = *v;
    if (auto v = take("mobility.lipschitz"))
        cfg.mobility_lipschitz = detail::to_double("mobility.lipschitz", *v);

    if (auto v = take("solver.method"))
        try {
            cfg.solver.method = angle_method_from_string(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    if (auto v = take("solver.tol_abs")) cfg.solver.tol_abs = detail::to_double("solver.tol_abs", *v);
    if (auto v = take("solver.max_iter")) cfg.solver.max_iter = detail::to_int("solver.max_iter", *v);
    if (auto v = take("solver.warn_only_on_exist_cond"))
        cfg.solver.warn_only_on_exist_cond = detail::to_bool("solver.warn_only_on_exist_cond", *v);

    if (auto v = take("output.dir")) cfg.output_dir = *v;
    if (auto v = take("output.stride")) cfg.output_stride = detail::to_int("output.stride", *v);
    if (auto v = take("bounds.c1")) cfg.c1 = detail::to_double("bounds.c1", *v);

    if (auto v = take("converge.levels")) cfg.converge.levels = detail::to_int_list("converge.levels", *v);
    if (auto v = take("converge.dt_over_dx"))
        cfg.converge.dt_over_dx = detail::to_double("converge.dt_over_dx", *v);
    if (auto v = take("converge.horizon"))
        cfg.converge.horizon = detail::to_double("converge.horizon", *v);
    if (auto v = take("converge.floor"))
        cfg.converge.order_floor = detail::to_double("converge.floor", *v);
    if (auto v = take("converge.ref_factor"))
        cfg.converge.ref_factor = detail::to_int("converge.ref_factor", *v);
    if (auto v = take("converge.tol_abs"))
        cfg.converge.tol_abs = detail::to_double("converge.tol_abs", *v);

    if (!kv.empty()) throw ConfigError("unknown key '" + kv.begin()->first + "'");

    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.output_stride < 0) throw ConfigError("output.stride must be >= 0");
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return parse_config(in);
}

/// Fully resolved inputs of a single simulation.
struct ResolvedRun {
    ModelParams params;
    GridSpec grid;
    MobilityField mobility;
    Field eta0;
    Field theta0;
    double c1 = 1.0;
};

namespace detail {

inline std::vector<double> read_node_file(const std::string& path, int expected) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open initial-data file '" + path + "'");
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) vals.push_back(to_double(path, tok));
    if (static_cast<int>(vals.size()) != expected)
        throw ConfigError("'" + path + "' holds " + std::to_string(vals.size()) +
                          " values, expected " + std::to_string(expected));
    return vals;
}

} // namespace detail

inline ResolvedRun resolve(const RunConfig& cfg) {
    GridSpec grid{};
    if (cfg.preset >= 1 && cfg.preset <= 3) {
        grid = preset_grid(cfg.preset);
        if (cfg.grid_K || cfg.grid_dt || cfg.grid_N) {
            try {
                grid = GridSpec::make(cfg.grid_K.value_or(grid.K), cfg.grid_dt.value_or(grid.dt),
                                      cfg.grid_N.value_or(grid.N));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    } else if (cfg.preset == 0) {
        if (!cfg.grid_K || !cfg.grid_dt || !cfg.grid_N)
            throw ConfigError("custom initial data requires grid.K, grid.dt and grid.N");
        try {
            grid = GridSpec::make(*cfg.grid_K, *cfg.grid_dt, *cfg.grid_N);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        throw ConfigError("ic.preset must be 1..3 or custom");
    }

    Field eta0(grid.K), theta0(grid.K);
    if (cfg.preset != 0) {
        auto [e0, t0] = preset_initial(cfg.preset, grid);
        eta0 = std::move(e0);
        theta0 = std::move(t0);
    } else {
        auto fill = [&](Field& f, const std::string& expr_text, const std::string& file,
                        const char* what) {
            if (!expr_text.empty() && !file.empty())
                throw ConfigError(std::string(what) + ": give an expression or a file, not both");
            if (!expr_text.empty()) {
                try {
                    const Expression e(expr_text);
                    for (int k = 0; k <= grid.K; ++k) f[k] = e(0.0, grid.x_at(k));
                } catch (const ExprError& err) {
                    throw ConfigError(err.what());
                }
            } else if (!file.empty()) {
                const std::vector<double> vals = detail::read_node_file(file, grid.K + 1);
                for (int k = 0; k <= grid.K; ++k) f[k] = vals[static_cast<size_t>(k)];
            } else {
                throw ConfigError(std::string(what) + " missing for custom initial data");
            }
        };
        fill(eta0, cfg.eta_expr, cfg.eta_file, "ic.eta");
        fill(theta0, cfg.theta_expr, cfg.theta_file, "ic.theta");
    }
    try {
        eta0 = fold_ghosts(std::move(eta0));
        theta0 = fold_ghosts(std::move(theta0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    MobilityField mobility = MobilityField::constant(cfg.params.delta0);
    if (!cfg.mobility_expr.empty()) {
        try {
            const Expression e(cfg.mobility_expr);
            mobility = MobilityField::from_function(
                [e](double t, double x) { return e(t, x); }, std::max(grid.horizon(), 1.0),
                cfg.mobility_lipschitz);
        } catch (const ExprError& err) {
            throw ConfigError(err.what());
        } catch (const std::invalid_argument& err) {
            throw ConfigError(err.what());
        }
        // delta0 is the declared floor of the mobility; a mobility dipping
        // below it invalidates every step bound and the dissipation weights
        if (mobility.inf_value() < cfg.params.delta0 * (1.0 - 1e-9))
            throw ConfigError("mobility infimum " + std::to_string(mobility.inf_value()) +
                              " lies below params.delta0 = " +
                              std::to_string(cfg.params.delta0));
    }

    const double c1 = cfg.c1.value_or(std::max(1.0, linf_norm(eta0)));
    if (!(c1 >= 1.0)) throw ConfigError("bounds.c1 must be >= 1");

    return {cfg.params, grid, std::move(mobility), std::move(eta0), std::move(theta0), c1};
}

} // namespace kwc
