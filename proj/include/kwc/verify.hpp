/// @file verify.hpp
/// @brief Randomized self-checks of the discrete-calculus identities:
///        product rules, the summation-by-parts family, the folded-field
///        gradient identity, and the ghost-fold boundary property.

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kwc/discrete_ops.hpp"
#include "kwc/field.hpp"

namespace kwc {

struct IdentityCheck {
    std::string name;
    double worst_rel = 0.0;
    bool pass = true;
};

namespace detail {

inline void record(std::vector<IdentityCheck>& out, size_t idx, double lhs, double rhs,
                   double scale, double tol) {
    const double rel = std::abs(lhs - rhs) / std::max(1.0, scale);
    if (rel > out[idx].worst_rel) out[idx].worst_rel = rel;
    if (rel > tol) out[idx].pass = false;
}

} // namespace detail

/// Run every identity over `pairs` random folded field pairs per grid size.
/// A check passes when the relative defect stays within tol on every sample.
inline std::vector<IdentityCheck> run_operator_identity_suite(
    std::span<const int> grid_sizes, int pairs, uint64_t seed = 20240901,
    double tol = 1e-13) {
    std::vector<IdentityCheck> out = {
        {"product rule (forward)"},  {"product rule (backward)"},
        {"summation by parts I"},    {"summation by parts IIa"},
        {"summation by parts IIb"},  {"summation by parts V"},
        {"folded gradient identity"}, {"ghost fold boundary"},
    };
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    for (int K : grid_sizes) {
        const double dx = 1.0 / K;
        for (int trial = 0; trial < pairs; ++trial) {
            Field f(K), g(K);
            for (int k = 0; k <= K; ++k) {
                f[k] = unif(gen);
                g[k] = unif(gen);
            }
            f.fold();
            g.fold();
            Field fg(K);
            for (int k = -1; k <= K + 1; ++k) fg[k] = f[k] * g[k];

            // product rules, checked nodewise
            for (int k = 0; k <= K; ++k) {
                const double lhs_p = diff_plus(fg, k, dx);
                const double rhs_p = diff_plus(f, k, dx) * avg_plus(g, k) +
                                     avg_plus(f, k) * diff_plus(g, k, dx);
                detail::record(out, 0, lhs_p, rhs_p, std::abs(lhs_p) + std::abs(rhs_p), tol);
                const double lhs_m = diff_minus(fg, k, dx);
                const double rhs_m = diff_minus(f, k, dx) * avg_minus(g, k) +
                                     avg_minus(f, k) * diff_minus(g, k, dx);
                detail::record(out, 1, lhs_m, rhs_m, std::abs(lhs_m) + std::abs(rhs_m), tol);
            }

            std::vector<double> nodes(static_cast<size_t>(K) + 1);
            auto weighted_sum = [&](auto&& value) {
                for (int k = 0; k <= K; ++k) nodes[static_cast<size_t>(k)] = value(k);
                return trap_sum(nodes) * dx;
            };
            auto bracket = [&](auto&& value) { return value(K) - value(0); };

            // I: f (d+ g) + (d- f) g against the averaged product bracket
            {
                const double s1 = weighted_sum([&](int k) { return f[k] * diff_plus(g, k, dx); });
                const double s2 = weighted_sum([&](int k) { return diff_minus(f, k, dx) * g[k]; });
                const double br =
                    bracket([&](int k) { return 0.5 * (f[k] * g[k + 1] + f[k - 1] * g[k]); });
                detail::record(out, 2, s1 + s2, br,
                               std::abs(s1) + std::abs(s2) + std::abs(br), tol);
            }
            // IIa / IIb: one-sided sums against averaged brackets
            {
                double s1 = 0.0;
                for (int k = 0; k < K; ++k) s1 += f[k] * diff_plus(g, k, dx) * dx;
                const double s2 = weighted_sum([&](int k) { return diff_minus(f, k, dx) * g[k]; });
                const double br = bracket([&](int k) { return avg_minus(f, k) * g[k]; });
                detail::record(out, 3, s1 + s2, br,
                               std::abs(s1) + std::abs(s2) + std::abs(br), tol);
            }
            {
                double s1 = 0.0;
                for (int k = 1; k <= K; ++k) s1 += f[k] * diff_minus(g, k, dx) * dx;
                const double s2 = weighted_sum([&](int k) { return diff_plus(f, k, dx) * g[k]; });
                const double br = bracket([&](int k) { return avg_plus(f, k) * g[k]; });
                detail::record(out, 4, s1 + s2, br,
                               std::abs(s1) + std::abs(s2) + std::abs(br), tol);
            }
            // V: gradient-gradient sum against the second-difference sum
            {
                double s1 = 0.0;
                for (int k = 0; k < K; ++k) s1 += diff_plus(f, k, dx) * diff_plus(g, k, dx) * dx;
                const double s2 = weighted_sum([&](int k) { return diff_second(f, k, dx) * g[k]; });
                const double br = bracket([&](int k) { return diff_central(f, k, dx) * g[k]; });
                detail::record(out, 5, s1, -s2 + br,
                               std::abs(s1) + std::abs(s2) + std::abs(br), tol);
            }
            // folded gradient identity
            {
                const double lhs = weighted_sum([&](int k) {
                    const double dp = diff_plus(f, k, dx), dm = diff_minus(f, k, dx);
                    return 0.5 * (dp * dp + dm * dm);
                });
                double rhs = 0.0;
                for (int k = 0; k < K; ++k) {
                    const double d = diff_plus(f, k, dx);
                    rhs += d * d * dx;
                }
                detail::record(out, 6, lhs, rhs, std::abs(lhs) + std::abs(rhs), tol);
            }
            // ghost fold: central difference vanishes exactly at both ends
            {
                detail::record(out, 7, diff_central(f, 0, dx), 0.0, std::abs(f[1]) / dx, tol);
                detail::record(out, 7, diff_central(f, K, dx), 0.0, std::abs(f[K - 1]) / dx, tol);
            }
        }
    }
    return out;
}

} // namespace kwc
