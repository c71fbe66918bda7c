/// @file field.hpp
/// @brief Uniform 1D grid bookkeeping and node fields with Neumann ghost nodes.
///
/// The domain is always the unit interval split into K cells (dx = 1/K).
/// A Field stores K+3 values at nodes k = -1, 0, ..., K, K+1; the two ghost
/// nodes encode the homogeneous Neumann condition by even folding:
///   f[-1] = f[1],  f[K+1] = f[K-1].

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwc {

/// Space/time discretization of (0,1) x (0, N*dt).
struct GridSpec {
    int K = 0;       ///< number of cells; nodes run 0..K
    double dx = 0.0; ///< cell width, 1/K
    double dt = 0.0;
    int N = 0;       ///< number of time steps

    static GridSpec make(int K, double dt, int N) {
        if (K < 2) throw std::invalid_argument("GridSpec: K must be >= 2");
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw std::invalid_argument("GridSpec: dt must be positive");
        if (N < 1) throw std::invalid_argument("GridSpec: N must be >= 1");
        GridSpec g;
        g.K = K;
        g.dx = 1.0 / static_cast<double>(K);
        g.dt = dt;
        g.N = N;
        return g;
    }

    double x_at(int k) const { return static_cast<double>(k) * dx; }
    double time_at(int j) const { return static_cast<double>(j) * dt; }
    double horizon() const { return time_at(N); }
};

/// Node values indexed k = -1..K+1 (storage offset by one).
class Field {
public:
    Field() = default;

    explicit Field(int K, double value = 0.0)
        : K_(check_K(K)), v_(static_cast<size_t>(K) + 3, value) {}

    /// Build from interior node values 0..K and fold the ghosts.
    static Field from_interior(std::span<const double> nodes) {
        if (nodes.size() < 3)
            throw std::invalid_argument("Field: need at least 3 interior nodes");
        Field f(static_cast<int>(nodes.size()) - 1);
        for (size_t i = 0; i < nodes.size(); ++i) f.v_[i + 1] = nodes[i];
        f.fold();
        return f;
    }

    int K() const { return K_; }

    double operator[](int k) const { return v_[static_cast<size_t>(k + 1)]; }
    double& operator[](int k) { return v_[static_cast<size_t>(k + 1)]; }

    /// Checked access over the full window -1..K+1.
    double at(int k) const {
        require_index(k);
        return v_[static_cast<size_t>(k + 1)];
    }

    std::span<const double> interior() const {
        return {v_.data() + 1, static_cast<size_t>(K_) + 1};
    }

    /// Overwrite the ghost nodes from the interior (even reflection).
    void fold() {
        v_.front() = v_[2];                 // f[-1] = f[1]
        v_.back() = v_[v_.size() - 3];      // f[K+1] = f[K-1]
    }

    bool is_folded() const {
        return v_.front() == v_[2] && v_.back() == v_[v_.size() - 3];
    }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void require_index(int k) const {
        if (k < -1 || k > K_ + 1)
            throw std::out_of_range("Field index " + std::to_string(k) +
                                    " outside -1.." + std::to_string(K_ + 1));
    }

private:
    static int check_K(int K) {
        if (K < 2) throw std::invalid_argument("Field: K must be >= 2");
        return K;
    }

    int K_ = 0;
    std::vector<double> v_;
};

/// Fold the ghost nodes of a field with interior nodes 0..K already set.
/// Rejects non-finite interior entries.
inline Field fold_ghosts(Field f) {
    for (double x : f.interior())
        if (!std::isfinite(x))
            throw std::invalid_argument("fold_ghosts: non-finite interior entry");
    f.fold();
    return f;
}

} // namespace kwc
