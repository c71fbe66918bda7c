/// @file model.hpp
/// @brief Model parameters, the smoothed-absolute-value regularization and its
///        derivatives, the orientation-flux coefficient, the space-time
///        mobility, and the two time-step bounds.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kwc/field.hpp"

namespace kwc {

/// Fixed physical constants of the grain-boundary system.
///
/// eps, delta0 in (0,1); c, kappa0, kappa, nu positive. The constructor
/// rejects anything else.
struct ModelParams {
    double eps;    ///< regularization width of the smoothed |.|
    double delta0; ///< floor of the orientation-flux coefficient and of the mobility
    double c;      ///< relaxation rate pulling the order parameter to 1
    double kappa0; ///< order-parameter diffusion
    double kappa;  ///< order/angle coupling strength
    double nu;     ///< linear angle diffusion

    ModelParams(double eps_, double delta0_, double c_, double kappa0_,
                double kappa_, double nu_)
        : eps(eps_), delta0(delta0_), c(c_), kappa0(kappa0_), kappa(kappa_), nu(nu_) {
        auto in_unit = [](double v) { return v > 0.0 && v < 1.0 && std::isfinite(v); };
        auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!in_unit(eps)) throw std::invalid_argument("ModelParams: eps must be in (0,1)");
        if (!in_unit(delta0)) throw std::invalid_argument("ModelParams: delta0 must be in (0,1)");
        if (!positive(c)) throw std::invalid_argument("ModelParams: c must be > 0");
        if (!positive(kappa0)) throw std::invalid_argument("ModelParams: kappa0 must be > 0");
        if (!positive(kappa)) throw std::invalid_argument("ModelParams: kappa must be > 0");
        if (!positive(nu)) throw std::invalid_argument("ModelParams: nu must be > 0");
    }
};

/// sqrt(eps^2 + v^2): smooth, strictly positive stand-in for |v|.
inline double smooth_abs(const ModelParams& p, double v) {
    return std::sqrt(p.eps * p.eps + v * v);
}

/// v / sqrt(eps^2 + v^2), odd, |.| < 1.
inline double smooth_abs_prime(const ModelParams& p, double v) {
    return v / smooth_abs(p, v);
}

/// eps^2 / (eps^2 + v^2)^(3/2), even, bounded by 1/eps.
inline double smooth_abs_second(const ModelParams& p, double v) {
    const double s = p.eps * p.eps + v * v;
    return p.eps * p.eps / (s * std::sqrt(s));
}

/// -3 eps^2 v / (eps^2 + v^2)^(5/2), bounded in magnitude by 3/eps^2.
inline double smooth_abs_third(const ModelParams& p, double v) {
    const double s = p.eps * p.eps + v * v;
    return -3.0 * p.eps * p.eps * v / (s * s * std::sqrt(s));
}

/// Coefficient h^2/2 + delta0 weighting the singular angle flux.
inline double flux_coeff(const ModelParams& p, double h) {
    return 0.5 * h * h + p.delta0;
}

/// Space-time mobility of the angle equation: a positive Lipschitz function
/// of (t, x) together with its Lipschitz constant and infimum.
class MobilityField {
public:
    using Fn = std::function<double(double, double)>;

    /// Constant mobility; the minimal choice consistent with inf = value.
    static MobilityField constant(double value) {
        if (!(value > 0.0)) throw std::invalid_argument("MobilityField: value must be > 0");
        MobilityField m;
        m.fn_ = [value](double, double) { return value; };
        m.lipschitz_ = 0.0;
        m.inf_ = value;
        return m;
    }

    /// General mobility. When no Lipschitz constant is supplied, estimate it
    /// (and the infimum) by sampling a 101x101 lattice on [0,t_max]x[0,1]
    /// and padding the max difference ratio by 5%.
    static MobilityField from_function(Fn f, double t_max,
                                       std::optional<double> lipschitz = std::nullopt) {
        if (!f) throw std::invalid_argument("MobilityField: empty function");
        if (!(t_max > 0.0)) throw std::invalid_argument("MobilityField: t_max must be > 0");
        MobilityField m;
        m.fn_ = std::move(f);

        constexpr int n = 101;
        const double ht = t_max / (n - 1), hx = 1.0 / (n - 1);
        double inf = std::numeric_limits<double>::infinity();
        double ratio = 0.0;
        std::vector<double> prev_row(n);
        for (int i = 0; i < n; ++i) {
            const double t = i * ht;
            double prev = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = j * hx;
                const double v = m.fn_(t, x);
                if (!std::isfinite(v))
                    throw std::invalid_argument("MobilityField: non-finite sample");
                inf = std::min(inf, v);
                if (j > 0) ratio = std::max(ratio, std::abs(v - prev) / hx);
                if (i > 0) ratio = std::max(ratio, std::abs(v - prev_row[j]) / ht);
                prev = v;
                prev_row[j] = v;
            }
        }
        if (!(inf > 0.0))
            throw std::invalid_argument("MobilityField: sampled infimum is not positive");
        m.inf_ = inf;
        m.lipschitz_ = lipschitz ? *lipschitz : 1.05 * ratio;
        if (m.lipschitz_ < 0.0)
            throw std::invalid_argument("MobilityField: Lipschitz constant must be >= 0");
        return m;
    }

    double operator()(double t, double x) const { return fn_(t, x); }
    double lipschitz() const { return lipschitz_; }
    double inf_value() const { return inf_; }

    /// Node samples alpha0(t, k dx) for k = 0..K.
    std::vector<double> sample_nodes(const GridSpec& g, double t) const {
        std::vector<double> a(static_cast<size_t>(g.K) + 1);
        for (int k = 0; k <= g.K; ++k) a[static_cast<size_t>(k)] = fn_(t, g.x_at(k));
        return a;
    }

private:
    Fn fn_;
    double lipschitz_ = 0.0;
    double inf_ = 0.0;
};

/// Sufficient step bound for unique solvability of the implicit angle update:
/// dt < nu^2 eps^2 / (4 kappa^2 delta0 (delta0 + 1/2)^2) * dx^2.
inline double dt_existence_bound(const ModelParams& p, double dx) {
    if (!(dx > 0.0)) throw std::invalid_argument("dt_existence_bound: dx must be > 0");
    const double half_shift = p.delta0 + 0.5;
    return p.nu * p.nu * p.eps * p.eps /
           (4.0 * p.kappa * p.kappa * p.delta0 * half_shift * half_shift) * dx * dx;
}

/// The two step-size bounds plus the constants entering them.
struct StabilityBounds {
    double dt_exist = 0.0; ///< solvability bound at the given dx
    double dt_error = 0.0; ///< error-estimate bound 1/(3a); +inf when a <= 0
    double a = 0.0;        ///< max{2(kappa c1/nu)^2 - (2 kappa eps + c), (L+1)/delta0}
    double c1 = 0.0;       ///< sup-norm bound used in the first branch
    double l_tilde = 0.0;  ///< Lipschitz constant of the mobility plus one
};

/// Evaluate both step bounds. c1 >= 1 is the caller's sup-norm bound on the
/// order parameter (1 is exact when the range [0,1] is preserved).
inline StabilityBounds stability_bounds(const ModelParams& p, const MobilityField& mob,
                                        double c1, double dx) {
    if (!(c1 >= 1.0)) throw std::invalid_argument("stability_bounds: c1 must be >= 1");
    StabilityBounds b;
    b.c1 = c1;
    b.l_tilde = mob.lipschitz() + 1.0;
    const double branch1 =
        2.0 * (p.kappa * c1 / p.nu) * (p.kappa * c1 / p.nu) - (2.0 * p.kappa * p.eps + p.c);
    const double branch2 = b.l_tilde / p.delta0;
    b.a = std::max(branch1, branch2);
    b.dt_error = b.a > 0.0 ? 1.0 / (3.0 * b.a) : std::numeric_limits<double>::infinity();
    b.dt_exist = dt_existence_bound(p, dx);
    return b;
}

} // namespace kwc
