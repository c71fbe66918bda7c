/// @file presets.hpp
/// @brief The three built-in computation examples: reference parameter set,
///        grids, and piecewise initial data.
///
/// All three share the parameter set eps = delta0 = nu = kappa0 = 0.01,
/// c = 1, kappa = 0.1 on a K = 50 grid, and an angle jump of pi/2 between
/// theta1 = -pi/4 and theta2 = pi/4. They differ in the position of the
/// order-parameter dip, the angle profile, and the time step:
///   1: dip at x = 0.5, linear angle,  dt = 0.06,   N = 200
///   2: dip at x = 0.25, linear angle, dt = 0.075,  N = 128
///   3: dip at x = 0.25, kinked angle, dt = 0.1414, N = 200

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "kwc/field.hpp"
#include "kwc/model.hpp"

namespace kwc {

inline ModelParams reference_params() {
    return ModelParams(0.01, 0.01, 1.0, 0.01, 0.1, 0.01);
}

inline GridSpec preset_grid(int example_id) {
    switch (example_id) {
    case 1: return GridSpec::make(50, 0.06, 200);
    case 2: return GridSpec::make(50, 0.075, 128);
    case 3: return GridSpec::make(50, 0.1414, 200);
    default: throw std::invalid_argument("unknown example id");
    }
}

namespace detail {

/// Order-parameter dip: A cosh(x) + 1 left of the junction, B cosh(x-1) + 1
/// right of it, with A, B chosen so the profile is continuous and its depth
/// scales with the angle jump.
struct OrderDip {
    double junction;
    double A;
    double B;

    OrderDip(double junction_, double angle_jump) : junction(junction_) {
        const double tl = std::tanh(junction);
        const double tr = std::tanh(1.0 - junction);
        const double depth = angle_jump / (angle_jump + tl + tr);
        A = -depth / std::cosh(junction);
        B = -depth / std::cosh(1.0 - junction);
    }

    double operator()(double x) const {
        return x < junction ? A * std::cosh(x) + 1.0 : B * std::cosh(x - 1.0) + 1.0;
    }
};

} // namespace detail

/// Closed-form initial order parameter of an example.
inline double preset_eta0(int example_id, double x) {
    if (example_id < 1 || example_id > 3) throw std::invalid_argument("unknown example id");
    constexpr double pi = std::numbers::pi;
    const detail::OrderDip dip(example_id == 1 ? 0.5 : 0.25, 0.5 * pi);
    return dip(x);
}

/// Closed-form initial orientation angle of an example.
inline double preset_theta0(int example_id, double x) {
    if (example_id < 1 || example_id > 3) throw std::invalid_argument("unknown example id");
    constexpr double pi = std::numbers::pi;
    if (example_id == 3)
        return x < 0.6 ? -0.25 * pi * x - 0.1 * pi : 0.125 * pi * x + 0.125 * pi;
    return 0.5 * pi * x - 0.25 * pi;
}

/// Initial fields of an example evaluated at the grid nodes, ghosts folded.
inline std::pair<Field, Field> preset_initial(int example_id, const GridSpec& g) {
    Field eta0(g.K), th0(g.K);
    for (int k = 0; k <= g.K; ++k) {
        eta0[k] = preset_eta0(example_id, g.x_at(k));
        th0[k] = preset_theta0(example_id, g.x_at(k));
    }
    return {fold_ghosts(std::move(eta0)), fold_ghosts(std::move(th0))};
}

} // namespace kwc
