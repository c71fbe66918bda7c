/// @file stepper.hpp
/// @brief One full time step of the scheme: linear implicit update of the
///        order parameter, nonlinear implicit update of the orientation
///        angle, the discrete free energy, and the structural verifiers
///        (range preservation, energy dissipation).
///
/// Update order within a step: the order parameter advances first using the
/// angle at the old level; the angle then advances using the new order
/// parameter.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwc/discrete_ops.hpp"
#include "kwc/field.hpp"
#include "kwc/model.hpp"
#include "kwc/tridiag.hpp"

namespace kwc {

/// Allowed overshoot of the exact range bounds; absorbs the finite tolerance
/// of the nonlinear solve.
inline constexpr double range_slack = 1e-10;

/// Dissipation slack allowance is this times max(1, initial energy) / dt.
inline constexpr double dissipation_rel_tol = 1e-8;

enum class AngleMethod { newton, picard };

inline AngleMethod angle_method_from_string(const std::string& s) {
    if (s == "newton") return AngleMethod::newton;
    if (s == "picard") return AngleMethod::picard;
    throw std::invalid_argument("unknown solver method '" + s + "'");
}

struct AngleSolveConfig {
    AngleMethod method = AngleMethod::newton;
    double tol_abs = 1e-12; ///< max-norm residual tolerance
    int max_iter = 50;      ///< cap on linear-solve iterations
    bool warn_only_on_exist_cond = true;

    void validate() const {
        if (!(tol_abs > 0.0)) throw std::invalid_argument("solver tol_abs must be > 0");
        if (max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
    }
};

struct SolveDiagnostics {
    int iterations = 0;        ///< residual evaluations of the outer loop
    double final_residual = 0.0;
    double prev_residual = 0.0; ///< residual norm before the last update
};

namespace detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

} // namespace detail

/// Thrown when the angle solve exhausts its iteration budget.
class NonconvergenceError : public std::runtime_error {
public:
    NonconvergenceError(int iterations, double residual)
        : std::runtime_error("angle solve did not converge after " +
                             std::to_string(iterations) + " iterations (residual " +
                             detail::sci(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    NonconvergenceError(const std::string& context, const NonconvergenceError& cause)
        : std::runtime_error(context + ": " + cause.what()),
          iterations_(cause.iterations_), residual_(cause.residual_) {}

    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

struct SimState {
    int step = 0;
    double time = 0.0;
    Field eta;
    Field theta;
    double energy = 0.0;
    double initial_energy = 0.0;
    double theta_bound = 0.0; ///< max |theta| of the initial data
    SolveDiagnostics last_solve;
};

struct StepReport {
    bool range_ok = true;
    double range_violation = 0.0; ///< worst overshoot past the exact bounds
    bool dissipation_ok = true;
    double dissipation_slack = 0.0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    int theta_iterations = 0;
};

struct LinearSystem {
    TridiagonalMatrix matrix;
    std::vector<double> rhs;
};

/// Discrete free energy of a pair of (folded) fields.
inline double discrete_energy(const ModelParams& p, const GridSpec& g,
                              const Field& eta, const Field& theta) {
    const int K = g.K;
    std::vector<double> nodes(static_cast<size_t>(K) + 1);
    auto weighted = [&](auto&& node_value) {
        for (int k = 0; k <= K; ++k) nodes[static_cast<size_t>(k)] = node_value(k);
        return trap_sum(nodes) * g.dx;
    };

    const double grad_eta = weighted([&](int k) {
        const double dp = diff_plus(eta, k, g.dx), dm = diff_minus(eta, k, g.dx);
        return 0.5 * (dp * dp + dm * dm);
    });
    const double relax = weighted([&](int k) {
        const double d = eta[k] - 1.0;
        return d * d;
    });
    const double grad_theta = weighted([&](int k) {
        const double dp = diff_plus(theta, k, g.dx), dm = diff_minus(theta, k, g.dx);
        return 0.5 * (dp * dp + dm * dm);
    });
    const double coupling = weighted([&](int k) {
        return flux_coeff(p, eta[k]) * 0.5 *
               (smooth_abs(p, diff_plus(theta, k, g.dx)) +
                smooth_abs(p, diff_minus(theta, k, g.dx)));
    });

    return 0.5 * p.kappa0 * p.kappa0 * grad_eta + 0.5 * p.c * relax +
           0.5 * p.nu * p.nu * grad_theta + p.kappa * coupling;
}

/// Linear system of the implicit order-parameter update:
/// (I + dt(-kappa0^2 D2 + c I + kappa V)) eta_next = eta + c dt.
/// D2's corner rows carry the ghost-folded factor 2; V's diagonal is the
/// smoothed-gradient average of the old angle.
inline LinearSystem eta_update_system(const ModelParams& p, const GridSpec& g,
                                      const Field& eta, const Field& theta) {
    const int n = g.K + 1;
    const double lam = g.dt * p.kappa0 * p.kappa0 / (g.dx * g.dx);
    LinearSystem sys{TridiagonalMatrix(n), std::vector<double>(static_cast<size_t>(n))};
    for (int k = 0; k <= g.K; ++k) {
        const auto u = static_cast<size_t>(k);
        const double v = 0.5 * (smooth_abs(p, diff_plus(theta, k, g.dx)) +
                                smooth_abs(p, diff_minus(theta, k, g.dx)));
        sys.matrix.diag[u] = 1.0 + 2.0 * lam + g.dt * (p.c + p.kappa * v);
        if (k < g.K) sys.matrix.upper[u] = (k == 0) ? -2.0 * lam : -lam;
        if (k > 0) sys.matrix.lower[u] = (k == g.K) ? -2.0 * lam : -lam;
        sys.rhs[u] = eta[k] + p.c * g.dt;
    }
    return sys;
}

/// Advance the order parameter one step (direct banded solve).
inline Field step_eta(const ModelParams& p, const GridSpec& g,
                      const Field& eta, const Field& theta) {
    const LinearSystem sys = eta_update_system(p, g, eta, theta);
    return Field::from_interior(sys.matrix.solve(sys.rhs));
}

namespace detail {

/// alpha(eta_next) at nodes -1..K+1, reused across residual/jacobian/map.
inline std::vector<double> flux_coeff_nodes(const ModelParams& p, const Field& eta_next) {
    std::vector<double> a(static_cast<size_t>(eta_next.K()) + 3);
    for (int k = -1; k <= eta_next.K() + 1; ++k)
        a[static_cast<size_t>(k + 1)] = flux_coeff(p, eta_next[k]);
    return a;
}

} // namespace detail

/// Divergence of the nonlinear angle flux at nodes 0..K:
///   diff_plus(alpha(eta) g'(backward slope)) + diff_minus(alpha(eta) g'(forward slope)).
inline std::vector<double> angle_flux_divergence(const ModelParams& p, const GridSpec& g,
                                                 const Field& eta, const Field& theta) {
    const int K = g.K;
    const std::vector<double> a = detail::flux_coeff_nodes(p, eta);
    std::vector<double> gm(static_cast<size_t>(K) + 2), gp(static_cast<size_t>(K) + 2);
    for (int k = 0; k <= K + 1; ++k)
        gm[static_cast<size_t>(k)] =
            a[static_cast<size_t>(k + 1)] * smooth_abs_prime(p, diff_minus(theta, k, g.dx));
    for (int k = -1; k <= K; ++k)
        gp[static_cast<size_t>(k + 1)] =
            a[static_cast<size_t>(k + 1)] * smooth_abs_prime(p, diff_plus(theta, k, g.dx));
    std::vector<double> flux(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        flux[u] = (gm[u + 1] - gm[u]) / g.dx + (gp[u + 1] - gp[u]) / g.dx;
    }
    return flux;
}

/// Residual of the implicit angle equation at a guess; zero at the solution.
inline std::vector<double> theta_residual(const ModelParams& p, const GridSpec& g,
                                          std::span<const double> alpha0_next,
                                          const Field& eta_next, const Field& theta_prev,
                                          const Field& theta_guess) {
    const int K = g.K;
    if (static_cast<int>(alpha0_next.size()) != K + 1)
        throw std::invalid_argument("theta_residual: alpha0_next must have K+1 entries");
    const std::vector<double> flux = angle_flux_divergence(p, g, eta_next, theta_guess);
    std::vector<double> r(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        r[u] = alpha0_next[u] * (theta_guess[k] - theta_prev[k]) / g.dt -
               0.5 * p.kappa * flux[u] - p.nu * p.nu * diff_second(theta_guess, k, g.dx);
    }
    return r;
}

/// Analytic tridiagonal Jacobian of theta_residual with respect to the
/// interior nodes, with the ghost-node dependence of the corner rows folded
/// onto columns 1 and K-1.
inline TridiagonalMatrix theta_jacobian(const ModelParams& p, const GridSpec& g,
                                        std::span<const double> alpha0_next,
                                        const Field& eta_next, const Field& theta_guess) {
    const int K = g.K;
    if (static_cast<int>(alpha0_next.size()) != K + 1)
        throw std::invalid_argument("theta_jacobian: alpha0_next must have K+1 entries");
    const std::vector<double> a = detail::flux_coeff_nodes(p, eta_next);
    const double nudx2 = p.nu * p.nu / (g.dx * g.dx);
    const double kap2 = 0.5 * p.kappa / (g.dx * g.dx);

    // Face coupling between nodes k and k+1, for faces k = -1..K.
    auto face = [&](int k) {
        const double w = a[static_cast<size_t>(k + 1)] + a[static_cast<size_t>(k + 2)];
        return kap2 * w * smooth_abs_second(p, diff_plus(theta_guess, k, g.dx)) + nudx2;
    };

    TridiagonalMatrix J(K + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        const double wp = face(k);     // face (k, k+1)
        const double wm = face(k - 1); // face (k-1, k)
        J.diag[u] = alpha0_next[u] / g.dt + wp + wm;
        if (k < K) J.upper[u] = -wp;
        if (k > 0) J.lower[u] = -wm;
    }
    J.upper[0] -= face(-1);                      // ghost node -1 is node 1
    J.lower[static_cast<size_t>(K)] -= face(K);  // ghost node K+1 is node K-1
    return J;
}

/// One application of the fixed-point map: solve
/// (W - dt nu^2 D2) theta_new = W theta_prev + dt (kappa/2) flux(theta_iter),
/// where W = diag(alpha0_next) and the flux is evaluated at the current
/// iterate.
inline Field picard_map(const ModelParams& p, const GridSpec& g,
                        std::span<const double> alpha0_next, const Field& eta_next,
                        const Field& theta_prev, const Field& theta_iter) {
    const int K = g.K;
    if (static_cast<int>(alpha0_next.size()) != K + 1)
        throw std::invalid_argument("picard_map: alpha0_next must have K+1 entries");
    const std::vector<double> flux = angle_flux_divergence(p, g, eta_next, theta_iter);
    const double mu = g.dt * p.nu * p.nu / (g.dx * g.dx);

    TridiagonalMatrix B(K + 1);
    std::vector<double> rhs(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        B.diag[u] = alpha0_next[u] + 2.0 * mu;
        if (k < K) B.upper[u] = (k == 0) ? -2.0 * mu : -mu;
        if (k > 0) B.lower[u] = (k == K) ? -2.0 * mu : -mu;
        rhs[u] = alpha0_next[u] * theta_prev[k] + 0.5 * g.dt * p.kappa * flux[u];
    }
    return Field::from_interior(B.solve(rhs));
}

namespace detail {

/// Convex objective minimized by the implicit angle update: time penalty
/// plus the angle-dependent part of the discrete energy. Its gradient with
/// respect to the interior nodes is the end-halved weighted residual,
/// weight(k) * dx * theta_residual(k). Strictly positive (the coupling term
/// is bounded below by kappa * delta0 * eps).
inline double angle_step_objective(const ModelParams& p, const GridSpec& g,
                                   std::span<const double> alpha0_next,
                                   const Field& eta_next, const Field& theta_prev,
                                   const Field& theta) {
    std::vector<double> nodes(static_cast<size_t>(g.K) + 1);
    auto weighted = [&](auto&& node_value) {
        for (int k = 0; k <= g.K; ++k) nodes[static_cast<size_t>(k)] = node_value(k);
        return trap_sum(nodes) * g.dx;
    };
    const double time_term = weighted([&](int k) {
        const double d = theta[k] - theta_prev[k];
        return alpha0_next[static_cast<size_t>(k)] * d * d / (2.0 * g.dt);
    });
    const double coupling = weighted([&](int k) {
        return flux_coeff(p, eta_next[k]) * 0.5 *
               (smooth_abs(p, diff_plus(theta, k, g.dx)) +
                smooth_abs(p, diff_minus(theta, k, g.dx)));
    });
    const double grad = weighted([&](int k) {
        const double dp = diff_plus(theta, k, g.dx), dm = diff_minus(theta, k, g.dx);
        return 0.5 * (dp * dp + dm * dm);
    });
    return time_term + p.kappa * coupling + 0.5 * p.nu * p.nu * grad;
}

} // namespace detail

/// One lagged-diffusivity iterate for the implicit angle update: the secant
/// weight 1/smooth_abs(slope) is frozen at the current iterate, turning the
/// update into a linear system. Minimizes a quadratic majorant of the step
/// objective that touches it at the iterate, so the result never increases
/// the objective.
inline Field lagged_diffusivity_step(const ModelParams& p, const GridSpec& g,
                                     std::span<const double> alpha0_next,
                                     const Field& eta_next, const Field& theta_prev,
                                     const Field& theta_iter) {
    const int K = g.K;
    const std::vector<double> a = detail::flux_coeff_nodes(p, eta_next);
    const double nudx2 = p.nu * p.nu / (g.dx * g.dx);
    const double kap2 = 0.5 * p.kappa / (g.dx * g.dx);
    // face weight between nodes k and k+1, frozen at the current slopes
    auto face = [&](int k) {
        const double w = a[static_cast<size_t>(k + 1)] + a[static_cast<size_t>(k + 2)];
        return kap2 * w / smooth_abs(p, diff_plus(theta_iter, k, g.dx)) + nudx2;
    };
    TridiagonalMatrix M(K + 1);
    std::vector<double> rhs(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        const double wp = face(k), wm = face(k - 1);
        M.diag[u] = alpha0_next[u] / g.dt + wp + wm;
        if (k < K) M.upper[u] = -wp;
        if (k > 0) M.lower[u] = -wm;
        rhs[u] = alpha0_next[u] * theta_prev[k] / g.dt;
    }
    M.upper[0] -= face(-1);
    M.lower[static_cast<size_t>(K)] -= face(K);
    return Field::from_interior(M.solve(rhs));
}

struct AngleSolveResult {
    Field theta;
    SolveDiagnostics diag;
};

/// Solve the implicit angle update. Newton iterates with the analytic
/// tridiagonal Jacobian, backtracking on the convex step objective; Picard
/// iterates the fixed-point map. Initial guess is the old angle. Throws
/// NonconvergenceError past the iteration cap.
inline AngleSolveResult step_theta(const ModelParams& p, const GridSpec& g,
                                   std::span<const double> alpha0_next,
                                   const Field& eta_next, const Field& theta_prev,
                                   const AngleSolveConfig& cfg) {
    cfg.validate();
    Field theta = theta_prev;
    theta.fold();

    auto res_norm = [&](const Field& th) {
        return linf_norm(theta_residual(p, g, alpha0_next, eta_next, theta_prev, th));
    };
    auto objective = [&](const Field& th) {
        return detail::angle_step_objective(p, g, alpha0_next, eta_next, theta_prev, th);
    };

    SolveDiagnostics diag;
    double rn = res_norm(theta);
    diag.iterations = 1;
    int updates = 0;
    double obj = (cfg.method == AngleMethod::newton) ? objective(theta) : 0.0;
    while (rn > cfg.tol_abs) {
        if (updates >= cfg.max_iter) throw NonconvergenceError(diag.iterations, rn);
        Field next(g.K);
        double rn_next = 0.0;
        if (cfg.method == AngleMethod::newton) {
            const std::vector<double> r =
                theta_residual(p, g, alpha0_next, eta_next, theta_prev, theta);
            const TridiagonalMatrix J = theta_jacobian(p, g, alpha0_next, eta_next, theta);
            const std::vector<double> delta = J.solve(r);
            // directional derivative of the objective along -delta
            double slope = 0.0;
            for (int k = 0; k <= g.K; ++k) {
                const double w = (k == 0 || k == g.K) ? 0.5 : 1.0;
                slope += w * g.dx * r[static_cast<size_t>(k)] * delta[static_cast<size_t>(k)];
            }
            // accept on halving the residual with the objective held to
            // rounding jitter (the quadratic tail runs at the objective's
            // resolution floor), or on the Armijo test for the objective
            double scale = 1.0;
            double obj_next = 0.0;
            bool accepted = false;
            const double obj_jitter = obj * (1.0 + 1e-12);
            for (int tries = 0; tries < 60 && !accepted; ++tries) {
                for (int k = 0; k <= g.K; ++k)
                    next[k] = theta[k] - scale * delta[static_cast<size_t>(k)];
                next.fold();
                obj_next = objective(next);
                rn_next = res_norm(next);
                accepted = (rn_next <= 0.5 * rn && obj_next <= obj_jitter) ||
                           obj_next <= obj - 1e-4 * scale * slope;
                if (!accepted) scale *= 0.5;
            }
            if (!accepted || scale < 0.25) {
                // Newton made little headway; try the frozen-weight iterate
                Field lagged =
                    lagged_diffusivity_step(p, g, alpha0_next, eta_next, theta_prev, theta);
                const double obj_lagged = objective(lagged);
                if (!accepted || obj_lagged < obj_next) {
                    const double rn_lagged = res_norm(lagged);
                    if (obj_lagged <= obj || rn_lagged < rn) {
                        next = std::move(lagged);
                        obj_next = obj_lagged;
                        rn_next = rn_lagged;
                        accepted = true;
                    }
                }
            }
            if (!accepted) throw NonconvergenceError(diag.iterations, rn);
            obj = obj_next;
        } else {
            next = picard_map(p, g, alpha0_next, eta_next, theta_prev, theta);
            rn_next = res_norm(next);
        }
        theta = std::move(next);
        diag.prev_residual = rn;
        rn = rn_next;
        ++updates;
        ++diag.iterations;
    }
    diag.final_residual = rn;
    return {std::move(theta), diag};
}

/// Build the state at step 0 from (possibly unfolded) initial node data.
inline SimState make_initial_state(const ModelParams& p, const GridSpec& g,
                                   Field eta0, Field theta0) {
    if (eta0.K() != g.K || theta0.K() != g.K)
        throw std::invalid_argument("make_initial_state: field size does not match grid");
    SimState s;
    s.eta = fold_ghosts(std::move(eta0));
    s.theta = fold_ghosts(std::move(theta0));
    s.energy = discrete_energy(p, g, s.eta, s.theta);
    s.initial_energy = s.energy;
    s.theta_bound = linf_norm(s.theta);
    return s;
}

struct DissipationCheck {
    bool ok = true;
    double slack = 0.0;
};

/// Signed slack of the discrete energy inequality across one step:
///   (F_after - F_before)/dt + ||d eta/dt||^2 + ||sqrt(alpha0) d theta/dt||^2,
/// nonpositive (up to tol) for exact solves.
inline DissipationCheck dissipation_check(const GridSpec& g,
                                          std::span<const double> alpha0_next,
                                          const SimState& before, const SimState& after,
                                          double tol) {
    const int K = g.K;
    std::vector<double> eta_rate(static_cast<size_t>(K) + 1),
        theta_rate(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const auto u = static_cast<size_t>(k);
        const double de = (after.eta[k] - before.eta[k]) / g.dt;
        const double dth = (after.theta[k] - before.theta[k]) / g.dt;
        eta_rate[u] = de * de;
        theta_rate[u] = alpha0_next[u] * dth * dth;
    }
    const double lhs = (after.energy - before.energy) / g.dt;
    const double slack = lhs + trap_sum(eta_rate) * g.dx + trap_sum(theta_rate) * g.dx;
    return {slack <= tol, slack};
}

/// One full step plus the structural report.
inline std::pair<SimState, StepReport> advance(const ModelParams& p, const GridSpec& g,
                                               const MobilityField& mobility,
                                               const SimState& state,
                                               const AngleSolveConfig& cfg) {
    const double t_next = g.time_at(state.step + 1);
    const std::vector<double> alpha0_next = mobility.sample_nodes(g, t_next);

    SimState next;
    next.step = state.step + 1;
    next.time = t_next;
    next.initial_energy = state.initial_energy;
    next.theta_bound = state.theta_bound;
    next.eta = step_eta(p, g, state.eta, state.theta);
    AngleSolveResult sol = step_theta(p, g, alpha0_next, next.eta, state.theta, cfg);
    next.theta = std::move(sol.theta);
    next.last_solve = sol.diag;
    next.energy = discrete_energy(p, g, next.eta, next.theta);

    StepReport rep;
    rep.energy_before = state.energy;
    rep.energy_after = next.energy;
    rep.theta_iterations = sol.diag.iterations;

    double worst = 0.0;
    for (int k = 0; k <= g.K; ++k) {
        worst = std::max(worst, -next.eta[k]);
        worst = std::max(worst, next.eta[k] - 1.0);
        worst = std::max(worst, std::abs(next.theta[k]) - state.theta_bound);
    }
    rep.range_violation = std::max(worst, 0.0);
    rep.range_ok = rep.range_violation <= range_slack;

    const double tol =
        dissipation_rel_tol * std::max(1.0, state.initial_energy) / g.dt;
    const DissipationCheck dc = dissipation_check(g, alpha0_next, state, next, tol);
    rep.dissipation_ok = dc.ok;
    rep.dissipation_slack = dc.slack;

    return {std::move(next), rep};
}

} // namespace kwc
