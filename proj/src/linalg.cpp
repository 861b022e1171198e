#include "geomrazor/linalg.hpp"

#include <cmath>
#include <string>

namespace geomrazor {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
        throw std::invalid_argument("Matrix: data length " + std::to_string(data.size()) +
                                    " does not equal rows*cols = " +
                                    std::to_string(rows * cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch, got " +
                                    std::to_string(got) + ", want " + std::to_string(want));
    }
}

}  // namespace

Vector matvec(const Matrix& m, const Vector& v) {
    require_dim(v.dim(), m.cols, "matvec");
    Vector out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
    require_dim(v.dim(), m.rows, "matvec_transposed");
    Vector out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        const double f = v[r];
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * f;
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_dim(b.rows, a.cols, "matmul");
    Matrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double f = a.at(i, k);
            if (f == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            double* orow = out.data.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += f * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out.at(c, r) = m.at(r, c);
    return out;
}

Matrix outer(const Vector& u, const Vector& v) {
    Matrix out(u.dim(), v.dim());
    for (std::size_t r = 0; r < u.dim(); ++r)
        for (std::size_t c = 0; c < v.dim(); ++c) out.at(r, c) = u[r] * v[c];
    return out;
}

Vector add(const Vector& a, const Vector& b) {
    require_dim(b.dim(), a.dim(), "add");
    Vector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vector sub(const Vector& a, const Vector& b) {
    require_dim(b.dim(), a.dim(), "sub");
    Vector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vector scale(const Vector& v, double c) {
    Vector out(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] * c;
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("add: matrix shape mismatch");
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

Matrix scale(const Matrix& m, double c) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i] * c;
    return out;
}

double dot(const Vector& a, const Vector& b) {
    require_dim(b.dim(), a.dim(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm_sq(const Vector& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.dim(); ++i) acc += v[i] * v[i];
    return acc;
}

double norm(const Vector& v) { return std::sqrt(norm_sq(v)); }

bool all_finite(const Vector& v) {
    for (double x : v.data)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) {
    for (double x : m.data)
        if (!std::isfinite(x)) return false;
    return true;
}

double frobenius_norm_sq(const Matrix& m) {
    double acc = 0.0;
    for (double x : m.data) acc += x * x;
    return acc;
}

double spectral_norm(const Matrix& m, double tol, std::size_t max_iter) {
    if (m.empty()) throw std::invalid_argument("spectral_norm: empty matrix");
    if (!(tol > 0.0)) throw std::invalid_argument("spectral_norm: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("spectral_norm: max_iter must be >= 1");

    const std::size_t n = m.cols;
    Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::size_t fallback = 0;  // next basis vector to try if v lands in ker(mᵀm)

    double lambda = 0.0;
    double residual = 0.0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        Vector w = matvec_transposed(m, matvec(m, v));  // B v with B = mᵀm
        const double wn = norm(w);
        if (wn == 0.0) {
            if (frobenius_norm_sq(m) == 0.0) return 0.0;
            // v is in the kernel of B; restart from the next basis vector.
            if (fallback >= n) {
                throw PowerIterationError("spectral_norm: no usable start vector", 0.0, 0.0);
            }
            v = Vector(n, 0.0);
            v[fallback++] = 1.0;
            continue;
        }

        lambda = dot(v, w);  // Rayleigh quotient; v is unit length
        if (lambda < 0.0) lambda = 0.0;

        double rsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = w[i] - lambda * v[i];
            rsq += d * d;
        }
        residual = std::sqrt(rsq);
        if (residual <= tol * lambda) return std::sqrt(lambda);

        v = scale(w, 1.0 / wn);
    }

    throw PowerIterationError(
        "spectral_norm: did not converge within " + std::to_string(max_iter) +
            " iterations (estimate " + std::to_string(std::sqrt(lambda)) + ", residual " +
            std::to_string(residual) + ")",
        std::sqrt(lambda), residual);
}

}  // namespace geomrazor
