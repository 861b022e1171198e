#pragma once

// Test-only oracles, kept independent of the library's computation paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "geomrazor/linalg.hpp"
#include "geomrazor/rng.hpp"

namespace oracles {

/// Singular values by one-sided Jacobi rotations, descending.  Orthogonalizes
/// the columns of the matrix; the singular values are the column norms at
/// convergence.  Entirely independent of the power-iteration path.
inline std::vector<double> singular_values(geomrazor::Matrix a) {
    using geomrazor::Matrix;
    if (a.rows < a.cols) a = transpose(a);
    const std::size_t m = a.rows, n = a.cols;

    auto col_dot = [&](std::size_t p, std::size_t q) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += a.at(r, p) * a.at(r, q);
        return acc;
    };

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = col_dot(p, p);
                const double beta = col_dot(q, q);
                const double gamma = col_dot(p, q);
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < m; ++r) {
                    const double ap = a.at(r, p);
                    const double aq = a.at(r, q);
                    a.at(r, p) = c * ap - s * aq;
                    a.at(r, q) = s * ap + c * aq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += a.at(r, c) * a.at(r, c);
        sigma[c] = std::sqrt(acc);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    return sigma;
}

inline double top_singular_value(const geomrazor::Matrix& a) {
    return singular_values(a).front();
}

inline geomrazor::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                       double lo = -1.0, double hi = 1.0) {
    geomrazor::Rng rng(seed);
    geomrazor::Matrix m(rows, cols);
    for (double& x : m.data) x = rng.uniform(lo, hi);
    return m;
}

inline geomrazor::Vector random_vector(std::size_t dim, std::uint64_t seed, double lo = -1.0,
                                       double hi = 1.0) {
    geomrazor::Rng rng(seed);
    geomrazor::Vector v(dim);
    for (double& x : v.data) x = rng.uniform(lo, hi);
    return v;
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace oracles
