/// @file discrete_ops.hpp
/// @brief Discrete calculus on node fields: difference/average operators,
///        trapezoidal summation, discrete norms, and secant-slope quotients.
///
/// Index windows (field window is -1..K+1):
///   diff_plus    k in -1..K      (f[k+1]-f[k])/dx
///   diff_minus   k in  0..K+1    (f[k]-f[k-1])/dx
///   diff_central k in  0..K      (f[k+1]-f[k-1])/(2 dx)
///   diff_second  k in  0..K      (f[k+1]-2 f[k]+f[k-1])/dx^2
///   avg_plus     k in -1..K      (f[k]+f[k+1])/2
///   avg_minus    k in  0..K+1    (f[k]+f[k-1])/2
///
/// trap_sum is the end-halved node sum WITHOUT the dx weight; callers
/// multiply by dx where a quadrature is meant.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "kwc/field.hpp"

namespace kwc {

inline double diff_plus(const Field& f, int k, double dx) {
    f.require_index(k);
    f.require_index(k + 1);
    return (f[k + 1] - f[k]) / dx;
}

inline double diff_minus(const Field& f, int k, double dx) {
    f.require_index(k - 1);
    f.require_index(k);
    return (f[k] - f[k - 1]) / dx;
}

inline double diff_central(const Field& f, int k, double dx) {
    f.require_index(k - 1);
    f.require_index(k + 1);
    return (f[k + 1] - f[k - 1]) / (2.0 * dx);
}

inline double diff_second(const Field& f, int k, double dx) {
    f.require_index(k - 1);
    f.require_index(k + 1);
    return (f[k + 1] - 2.0 * f[k] + f[k - 1]) / (dx * dx);
}

inline double avg_plus(const Field& f, int k) {
    f.require_index(k);
    f.require_index(k + 1);
    return 0.5 * (f[k] + f[k + 1]);
}

inline double avg_minus(const Field& f, int k) {
    f.require_index(k - 1);
    f.require_index(k);
    return 0.5 * (f[k] + f[k - 1]);
}

/// End-halved node sum: g0/2 + g1 + ... + g_{K-1} + gK/2. No dx factor.
inline double trap_sum(std::span<const double> g) {
    if (g.size() < 2) throw std::invalid_argument("trap_sum: need >= 2 nodes");
    double s = 0.5 * (g.front() + g.back());
    for (size_t i = 1; i + 1 < g.size(); ++i) s += g[i];
    return s;
}

inline double trap_sum(const Field& f) { return trap_sum(f.interior()); }

/// Discrete L2 norm over nodes 0..K: sqrt(trap_sum(|f|^2) * dx).
inline double l2_norm(std::span<const double> nodes, double dx) {
    double s = 0.5 * (nodes.front() * nodes.front() + nodes.back() * nodes.back());
    for (size_t i = 1; i + 1 < nodes.size(); ++i) s += nodes[i] * nodes[i];
    return std::sqrt(s * dx);
}

inline double l2_norm(const Field& f, double dx) { return l2_norm(f.interior(), dx); }

inline double linf_norm(std::span<const double> nodes) {
    double m = 0.0;
    for (double x : nodes) m = std::max(m, std::abs(x));
    return m;
}

inline double linf_norm(const Field& f) { return linf_norm(f.interior()); }

/// Discrete Dirichlet seminorm: sqrt(sum_{k=0}^{K-1} |diff_plus f|^2 dx).
inline double dirichlet_seminorm(const Field& f, double dx) {
    double s = 0.0;
    for (int k = 0; k < f.K(); ++k) {
        const double d = (f[k + 1] - f[k]) / dx;
        s += d * d;
    }
    return std::sqrt(s * dx);
}

/// Arguments closer than this relative spread take the derivative branch
/// of the secant quotients below.
inline constexpr double secant_merge_tol = 1e-12;

inline bool secant_args_equal(double u, double v) {
    return std::abs(u - v) <=
           secant_merge_tol * std::max({1.0, std::abs(u), std::abs(v)});
}

/// Secant slope (F(u)-F(v))/(u-v), falling back to F'(v) at coincident
/// arguments.
template <class F, class Fd>
double diff_quotient(F&& f, Fd&& fprime, double u, double v) {
    if (secant_args_equal(u, v)) return fprime(v);
    return (f(u) - f(v)) / (u - v);
}

namespace detail {

/// d/dxi of the secant slope dF/d(xi, y), evaluated at xi.
template <class F, class Fd, class Fdd>
double secant_slope_partial(F&& f, Fd&& fprime, Fdd&& fsecond, double xi, double y) {
    if (secant_args_equal(xi, y)) return 0.5 * fsecond(xi);
    const double q = (f(xi) - f(y)) / (xi - y);
    return (fprime(xi) - q) / (xi - y);
}

} // namespace detail

/// Four-point second-order secant quotient of F at (xi, xi_t; eta, eta_t).
/// Bounded by sup|F''| and continuous across coincident arguments.
template <class F, class Fd, class Fdd>
double second_diff_quotient(F&& f, Fd&& fprime, Fdd&& fsecond,
                            double xi, double xi_t, double eta, double eta_t) {
    if (secant_args_equal(xi, xi_t)) {
        return detail::secant_slope_partial(f, fprime, fsecond, xi_t, eta) +
               detail::secant_slope_partial(f, fprime, fsecond, xi_t, eta_t);
    }
    const double top = (diff_quotient(f, fprime, xi, eta) +
                        diff_quotient(f, fprime, xi, eta_t)) -
                       (diff_quotient(f, fprime, xi_t, eta) +
                        diff_quotient(f, fprime, xi_t, eta_t));
    return top / (xi - xi_t);
}

} // namespace kwc
