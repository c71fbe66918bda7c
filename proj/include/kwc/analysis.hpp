/// @file analysis.hpp
/// @brief Error machinery: even reflection past the boundary, the six
///        consistency residuals of the scheme against a smooth field pair,
///        discrete error norms between nested runs, and refinement-based
///        convergence-order measurement.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwc/discrete_ops.hpp"
#include "kwc/field.hpp"
#include "kwc/model.hpp"
#include "kwc/stepper.hpp"

namespace kwc {

/// Even reflection of a function on [0,1] to [-dx, 1+dx]:
/// values at -x and 1+x mirror the interior. Evaluation outside the extended
/// interval (beyond a rounding allowance) is rejected.
class ReflectedFunction {
public:
    ReflectedFunction(std::function<double(double)> f, double dx)
        : f_(std::move(f)), dx_(dx) {
        if (!(dx > 0.0)) throw std::invalid_argument("ReflectedFunction: dx must be > 0");
    }

    double operator()(double x) const {
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(x));
        if (x < -dx_ - tol || x > 1.0 + dx_ + tol)
            throw std::domain_error("ReflectedFunction: argument outside [-dx, 1+dx]");
        const double y = std::clamp(x, -dx_, 1.0 + dx_);
        if (y < 0.0) return f_(-y);
        if (y > 1.0) return f_(2.0 - y);
        return f_(y);
    }

    double dx() const { return dx_; }

private:
    std::function<double(double)> f_;
    double dx_;
};

inline ReflectedFunction reflect_extend(std::function<double(double)> f, double dx) {
    return ReflectedFunction(std::move(f), dx);
}

/// Smooth space-time fields with the partial derivatives needed by the
/// residual machinery.
struct SmoothFieldPair {
    using Fn = std::function<double(double, double)>;
    Fn eta, eta_t, eta_x, eta_xx;
    Fn theta, theta_t, theta_x, theta_xx;

    /// Spot-check the supplied derivatives against central differences at
    /// random points of [0, t_max] x [0, 1]. Throws on disagreement.
    void validate(double t_max, int samples = 64, double rel_tol = 1e-5,
                  uint64_t seed = 12345) const {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> ut(0.0, t_max), ux(0.1, 0.9);
        const double ht = 1e-6, hx = 1e-5;
        auto check = [&](double got, double want, const char* what) {
            if (std::abs(got - want) > rel_tol * std::max(1.0, std::abs(got)))
                throw std::invalid_argument(std::string("SmoothFieldPair: ") + what +
                                            " disagrees with finite differences");
        };
        for (int i = 0; i < samples; ++i) {
            const double t = ut(gen), x = ux(gen);
            check(eta_t(t, x), (eta(t + ht, x) - eta(t - ht, x)) / (2.0 * ht), "eta_t");
            check(eta_x(t, x), (eta(t, x + hx) - eta(t, x - hx)) / (2.0 * hx), "eta_x");
            check(eta_xx(t, x),
                  (eta(t, x + hx) - 2.0 * eta(t, x) + eta(t, x - hx)) / (hx * hx), "eta_xx");
            check(theta_t(t, x), (theta(t + ht, x) - theta(t - ht, x)) / (2.0 * ht), "theta_t");
            check(theta_x(t, x), (theta(t, x + hx) - theta(t, x - hx)) / (2.0 * hx), "theta_x");
            check(theta_xx(t, x),
                  (theta(t, x + hx) - 2.0 * theta(t, x) + theta(t, x - hx)) / (hx * hx),
                  "theta_xx");
        }
    }
};

/// Nodewise consistency residuals of the scheme at one step, split by term.
struct ResidualSet {
    std::vector<double> eta_time;        ///< time-difference defect of the order eq.
    std::vector<double> eta_diffusion;   ///< second-difference defect of the order eq.
    std::vector<double> eta_coupling;    ///< smoothed-gradient coupling defect
    std::vector<double> theta_time;      ///< time-difference defect of the angle eq.
    std::vector<double> theta_diffusion; ///< second-difference defect of the angle eq.
    std::vector<double> theta_flux;      ///< nonlinear flux divergence defect
    std::vector<double> eta_total;       ///< sum of the three order-equation terms
    std::vector<double> theta_total;     ///< sum of the three angle-equation terms
};

namespace detail {

inline Field sample_extended(const ReflectedFunction& f, const GridSpec& g) {
    Field out(g.K);
    for (int k = -1; k <= g.K + 1; ++k) out[k] = f(g.x_at(k));
    return out;
}

} // namespace detail

/// Evaluate the six residuals of the scheme applied to a smooth pair across
/// the step j -> j+1, using the reflected extension for boundary stencils.
inline ResidualSet consistency_residuals(const ModelParams& p, const GridSpec& g,
                                         const MobilityField& mobility,
                                         const SmoothFieldPair& pair, int j) {
    const int K = g.K;
    const double t0 = g.time_at(j), t1 = g.time_at(j + 1);
    auto at_time = [&](const SmoothFieldPair::Fn& f, double t) {
        return detail::sample_extended(
            reflect_extend([&f, t](double x) { return f(t, x); }, g.dx), g);
    };
    const Field eta1 = at_time(pair.eta, t1);
    const Field theta0f = at_time(pair.theta, t0);
    const Field theta1f = at_time(pair.theta, t1);

    ResidualSet r;
    auto sz = static_cast<size_t>(K) + 1;
    r.eta_time.resize(sz);
    r.eta_diffusion.resize(sz);
    r.eta_coupling.resize(sz);
    r.theta_time.resize(sz);
    r.theta_diffusion.resize(sz);
    r.theta_flux.resize(sz);
    r.eta_total.resize(sz);
    r.theta_total.resize(sz);

    const std::vector<double> flux1 = angle_flux_divergence(p, g, eta1, theta1f);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        const double x = g.x_at(k);

        r.eta_time[u] = pair.eta_t(t1, x) - (pair.eta(t1, x) - pair.eta(t0, x)) / g.dt;
        r.eta_diffusion[u] =
            p.kappa0 * p.kappa0 * (diff_second(eta1, k, g.dx) - pair.eta_xx(t1, x));
        const double avg_sm = 0.5 * (smooth_abs(p, diff_plus(theta0f, k, g.dx)) +
                                     smooth_abs(p, diff_minus(theta0f, k, g.dx)));
        r.eta_coupling[u] =
            -p.kappa * pair.eta(t1, x) * (avg_sm - smooth_abs(p, pair.theta_x(t1, x)));

        r.theta_time[u] = -mobility(t1, x) *
                          ((pair.theta(t1, x) - pair.theta(t0, x)) / g.dt - pair.theta_t(t1, x));
        r.theta_diffusion[u] =
            p.nu * p.nu * (diff_second(theta1f, k, g.dx) - pair.theta_xx(t1, x));
        const double analytic_flux =
            pair.eta(t1, x) * pair.eta_x(t1, x) * smooth_abs_prime(p, pair.theta_x(t1, x)) +
            flux_coeff(p, pair.eta(t1, x)) * smooth_abs_second(p, pair.theta_x(t1, x)) *
                pair.theta_xx(t1, x);
        r.theta_flux[u] = 0.5 * p.kappa * flux1[u] - p.kappa * analytic_flux;

        r.eta_total[u] = r.eta_time[u] + r.eta_diffusion[u] + r.eta_coupling[u];
        r.theta_total[u] = r.theta_time[u] + r.theta_diffusion[u] + r.theta_flux[u];
    }
    return r;
}

/// Recorded node values of a run at a subset of its steps.
struct RunHistory {
    GridSpec grid;
    std::vector<double> times;
    std::vector<std::vector<double>> eta;   ///< node values 0..K per recorded step
    std::vector<std::vector<double>> theta;
};

/// Integrate and record every `stride`-th step (step 0 always included).
inline RunHistory run_recorded(const ModelParams& p, const GridSpec& g,
                               const MobilityField& mobility, Field eta0, Field theta0,
                               const AngleSolveConfig& cfg, int stride = 1) {
    if (stride < 1) throw std::invalid_argument("run_recorded: stride must be >= 1");
    RunHistory h;
    h.grid = g;
    SimState s = make_initial_state(p, g, std::move(eta0), std::move(theta0));
    auto record = [&](const SimState& st) {
        h.times.push_back(st.time);
        h.eta.emplace_back(st.eta.interior().begin(), st.eta.interior().end());
        h.theta.emplace_back(st.theta.interior().begin(), st.theta.interior().end());
    };
    record(s);
    for (int j = 0; j < g.N; ++j) {
        auto [next, rep] = advance(p, g, mobility, s, cfg);
        s = std::move(next);
        if (s.step % stride == 0 || s.step == g.N) record(s);
    }
    return h;
}

struct ErrorReport {
    std::vector<double> times;    ///< shared times the norms were taken at
    std::vector<double> eta_l2;   ///< per-step discrete L2 error of the order field
    std::vector<double> theta_l2; ///< per-step discrete L2 error of the angle field
    double sup_eta = 0.0;
    double sup_theta = 0.0;
};

/// Discrete L2 error norms between two runs at the nodes and times of the
/// coarser one. The grids must nest (one K divides the other) and every
/// coarse time must be recorded in the finer run.
inline ErrorReport error_norms(const RunHistory& a, const RunHistory& b) {
    const bool a_coarse = a.grid.K <= b.grid.K;
    const RunHistory& coarse = a_coarse ? a : b;
    const RunHistory& fine = a_coarse ? b : a;
    if (fine.grid.K % coarse.grid.K != 0)
        throw std::invalid_argument("error_norms: grids do not nest");
    const int ratio = fine.grid.K / coarse.grid.K;

    ErrorReport rep;
    std::vector<double> diff(static_cast<size_t>(coarse.grid.K) + 1);
    for (size_t i = 0; i < coarse.times.size(); ++i) {
        const double t = coarse.times[i];
        const double tol = 1e-9 * std::max(1.0, std::abs(t));
        const auto it = std::lower_bound(fine.times.begin(), fine.times.end(), t - tol);
        if (it == fine.times.end() || std::abs(*it - t) > tol)
            throw std::invalid_argument("error_norms: time grids do not nest");
        const size_t fi = static_cast<size_t>(it - fine.times.begin());
        for (int k = 0; k <= coarse.grid.K; ++k)
            diff[static_cast<size_t>(k)] = coarse.eta[i][static_cast<size_t>(k)] -
                                           fine.eta[fi][static_cast<size_t>(k * ratio)];
        rep.eta_l2.push_back(l2_norm(diff, coarse.grid.dx));
        for (int k = 0; k <= coarse.grid.K; ++k)
            diff[static_cast<size_t>(k)] = coarse.theta[i][static_cast<size_t>(k)] -
                                           fine.theta[fi][static_cast<size_t>(k * ratio)];
        rep.theta_l2.push_back(l2_norm(diff, coarse.grid.dx));
        rep.times.push_back(t);
    }
    rep.sup_eta = *std::max_element(rep.eta_l2.begin(), rep.eta_l2.end());
    rep.sup_theta = *std::max_element(rep.theta_l2.begin(), rep.theta_l2.end());
    return rep;
}

struct ConvergenceLevel {
    int K = 0;
    double dt = 0.0;
    double err_eta = 0.0;
    double err_theta = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    int reference_K = 0;
    bool degenerate = false;        ///< errors at machine zero; no fit
    double order_eta = 0.0;         ///< least-squares slope over all levels
    double order_theta = 0.0;
    double fit_residual_eta = 0.0;  ///< RMS residual of the log-log fit
    double fit_residual_theta = 0.0;
    double pairwise_order_eta = 0.0;  ///< slope from the two finest levels
    double pairwise_order_theta = 0.0;
};

struct InitialData {
    std::function<double(double)> eta0;
    std::function<double(double)> theta0;
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double rms_residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (icpt + f.slope * xs[i]);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

inline Field sample_nodes_field(const std::function<double(double)>& f, const GridSpec& g) {
    Field out(g.K);
    for (int k = 0; k <= g.K; ++k) out[k] = f(g.x_at(k));
    out.fold();
    return out;
}

} // namespace detail

/// Self-convergence study: run each level with dt = dt_over_dx * dx up to
/// horizon T, compare sup-over-steps discrete L2 errors against a reference
/// at ref_factor times the finest K, and fit the observed order in log(dx).
inline ConvergenceReport convergence_study(const ModelParams& p, const MobilityField& mobility,
                                           const InitialData& ic, std::vector<int> levels,
                                           double dt_over_dx, double T,
                                           const AngleSolveConfig& cfg, int ref_factor = 4) {
    if (levels.size() < 2)
        throw std::invalid_argument("convergence_study: need at least two levels");
    std::sort(levels.begin(), levels.end());
    const int k_max = levels.back();
    for (int K : levels)
        if (K < 2 || k_max % K != 0)
            throw std::invalid_argument("convergence_study: levels must nest into the finest");
    if (ref_factor < 2) throw std::invalid_argument("convergence_study: ref_factor must be >= 2");
    if (!(dt_over_dx > 0.0) || !(T > 0.0))
        throw std::invalid_argument("convergence_study: dt_over_dx and T must be positive");

    auto grid_for = [&](int K) {
        const double dx = 1.0 / K;
        const double dt = dt_over_dx * dx;
        const int N = static_cast<int>(std::llround(T / dt));
        return GridSpec::make(K, dt, std::max(N, 1));
    };

    auto run_level = [&](int K, int stride) {
        const GridSpec g = grid_for(K);
        try {
            return run_recorded(p, g, mobility, detail::sample_nodes_field(ic.eta0, g),
                                detail::sample_nodes_field(ic.theta0, g), cfg, stride);
        } catch (const NonconvergenceError& e) {
            throw NonconvergenceError("level K=" + std::to_string(K), e);
        }
    };

    const int K_ref = ref_factor * k_max;
    const RunHistory ref = run_level(K_ref, K_ref / k_max);

    ConvergenceReport rep;
    rep.reference_K = K_ref;
    for (int K : levels) {
        const RunHistory h = run_level(K, 1);
        const ErrorReport er = error_norms(h, ref);
        rep.levels.push_back({K, grid_for(K).dt, er.sup_eta, er.sup_theta});
    }

    double worst = 0.0;
    for (const auto& lv : rep.levels) worst = std::max({worst, lv.err_eta, lv.err_theta});
    if (worst < 1e-13) {
        rep.degenerate = true;
        rep.order_eta = rep.order_theta = std::numeric_limits<double>::quiet_NaN();
        rep.pairwise_order_eta = rep.pairwise_order_theta =
            std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    std::vector<double> log_dx, log_eta, log_theta;
    for (const auto& lv : rep.levels) {
        log_dx.push_back(std::log(1.0 / lv.K));
        log_eta.push_back(std::log(lv.err_eta));
        log_theta.push_back(std::log(lv.err_theta));
    }
    const auto fe = detail::fit_line(log_dx, log_eta);
    const auto ft = detail::fit_line(log_dx, log_theta);
    rep.order_eta = fe.slope;
    rep.order_theta = ft.slope;
    rep.fit_residual_eta = fe.rms_residual;
    rep.fit_residual_theta = ft.rms_residual;

    const auto& fine1 = rep.levels[rep.levels.size() - 2];
    const auto& fine2 = rep.levels.back();
    const double dlog = std::log(static_cast<double>(fine1.K) / fine2.K);
    rep.pairwise_order_eta = std::log(fine2.err_eta / fine1.err_eta) / dlog;
    rep.pairwise_order_theta = std::log(fine2.err_theta / fine1.err_theta) / dlog;
    return rep;
}

} // namespace kwc
