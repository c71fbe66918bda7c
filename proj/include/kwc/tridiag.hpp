/// @file tridiag.hpp
/// @brief Tridiagonal systems solved by the Thomas algorithm.
///
/// Every system assembled by the scheme is strictly diagonally dominant, so
/// elimination without pivoting is safe; solve() checks dominance first and
/// refuses to run on anything else.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace kwc {

struct TridiagonalMatrix {
    std::vector<double> lower; ///< lower[i] multiplies x[i-1]; lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper; ///< upper[i] multiplies x[i+1]; upper[n-1] unused

    explicit TridiagonalMatrix(int n = 0)
        : lower(static_cast<size_t>(n), 0.0),
          diag(static_cast<size_t>(n), 0.0),
          upper(static_cast<size_t>(n), 0.0) {}

    int n() const { return static_cast<int>(diag.size()); }

    bool strictly_diagonally_dominant() const {
        for (int i = 0; i < n(); ++i) {
            double off = 0.0;
            if (i > 0) off += std::abs(lower[static_cast<size_t>(i)]);
            if (i + 1 < n()) off += std::abs(upper[static_cast<size_t>(i)]);
            if (!(std::abs(diag[static_cast<size_t>(i)]) > off)) return false;
        }
        return true;
    }

    std::vector<double> apply(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n())
            throw std::invalid_argument("TridiagonalMatrix::apply: size mismatch");
        std::vector<double> y(x.size(), 0.0);
        for (int i = 0; i < n(); ++i) {
            const auto u = static_cast<size_t>(i);
            double s = diag[u] * x[u];
            if (i > 0) s += lower[u] * x[u - 1];
            if (i + 1 < n()) s += upper[u] * x[u + 1];
            y[u] = s;
        }
        return y;
    }

    /// Thomas forward elimination / back substitution.
    std::vector<double> solve(std::span<const double> rhs) const {
        if (static_cast<int>(rhs.size()) != n())
            throw std::invalid_argument("TridiagonalMatrix::solve: size mismatch");
        if (!strictly_diagonally_dominant())
            throw std::runtime_error(
                "TridiagonalMatrix::solve: matrix is not strictly diagonally dominant");
        const size_t m = rhs.size();
        std::vector<double> c(m, 0.0), d(m, 0.0);
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for (size_t i = 1; i < m; ++i) {
            const double denom = diag[i] - lower[i] * c[i - 1];
            c[i] = (i + 1 < m) ? upper[i] / denom : 0.0;
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
        }
        std::vector<double> x(m, 0.0);
        x[m - 1] = d[m - 1];
        for (size_t i = m - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
        return x;
    }
};

} // namespace kwc
