#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace geomrazor {

struct Vector {
    std::vector<double> data;

    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0) : data(dim, fill) {}
    Vector(std::initializer_list<double> init) : data(init) {}

    std::size_t dim() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool operator==(const Vector& other) const = default;
};

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    static Matrix identity(std::size_t n);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool empty() const { return rows == 0 || cols == 0; }

    bool operator==(const Matrix& other) const = default;
};

// ---- elementwise / product operations -------------------------------------

Vector matvec(const Matrix& m, const Vector& v);             // m v
Vector matvec_transposed(const Matrix& m, const Vector& v);  // mᵀ v
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix outer(const Vector& u, const Vector& v);  // u vᵀ

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& v, double c);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double c);

double dot(const Vector& a, const Vector& b);
double norm_sq(const Vector& v);
double norm(const Vector& v);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// ---- norms -----------------------------------------------------------------

/// Sum of squared entries, accumulated in row-major order.
double frobenius_norm_sq(const Matrix& m);

/// Thrown when power iteration fails to reach the requested tolerance.
/// Carries the last estimate and residual so callers can decide whether the
/// partial answer is usable.
class PowerIterationError : public std::runtime_error {
public:
    PowerIterationError(std::string message, double last_estimate, double residual)
        : std::runtime_error(std::move(message)),
          last_estimate(last_estimate),
          residual(residual) {}

    double last_estimate;
    double residual;
};

/// Largest singular value of m, via power iteration on mᵀm applied
/// implicitly.  Starts from the normalized all-ones vector; deterministic.
/// Stops when the eigen-residual ‖Bv − λv‖ drops below tol·λ, which bounds
/// |σ − σ_max| by roughly tol·σ_max.
double spectral_norm(const Matrix& m, double tol, std::size_t max_iter);

}  // namespace geomrazor
