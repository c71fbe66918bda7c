/// Shared helpers for the test suites: seeded RNG, random folded fields, and
/// a dense Gaussian-elimination oracle kept independent of the banded solver.

#pragma once

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "kwc/field.hpp"
#include "kwc/tridiag.hpp"

namespace kwc::test {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

/// Random field with interior values in [lo, hi], ghosts folded.
inline Field random_folded_field(std::mt19937_64& gen, int K, double lo = -1.0,
                                 double hi = 1.0) {
    Field f(K);
    for (int k = 0; k <= K; ++k) f[k] = uniform(gen, lo, hi);
    f.fold();
    return f;
}

/// Random field filled over the whole window -1..K+1 (no folding).
inline Field random_raw_field(std::mt19937_64& gen, int K, double lo = -1.0,
                              double hi = 1.0) {
    Field f(K);
    for (int k = -1; k <= K + 1; ++k) f[k] = uniform(gen, lo, hi);
    return f;
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (A[piv][col] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            const double m = A[r][col] / A[col][col];
            if (m == 0.0) continue;
            for (size_t c = col; c < n; ++c) A[r][c] -= m * A[col][c];
            b[r] -= m * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
        x[i] = s / A[i][i];
    }
    return x;
}

inline std::vector<std::vector<double>> to_dense(const TridiagonalMatrix& T) {
    const size_t n = static_cast<size_t>(T.n());
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        A[i][i] = T.diag[i];
        if (i > 0) A[i][i - 1] = T.lower[i];
        if (i + 1 < n) A[i][i + 1] = T.upper[i];
    }
    return A;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace kwc::test
