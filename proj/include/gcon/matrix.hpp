#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "gcon/errors.hpp"

namespace gcon {

using Vec = std::vector<double>;

/// Dense real matrix, row-major storage. Sized for the desk scale this
/// toolkit works at (state dimension <= ~16, agent count <= ~64); everything
/// is O(n^3) direct algorithms with no sparsity.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    // Construction from entry data validates finiteness (no NaN/Inf).
    Matrix(std::size_t rows, std::size_t cols, Vec entries);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    const Vec& data() const { return a_; }
    Vec& data() { return a_; }

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    Matrix operator-() const;
    Matrix operator*(const Matrix& rhs) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec a_;
};

Matrix transpose(const Matrix& m);
double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
bool all_finite(const Matrix& m);

Vec mat_vec(const Matrix& m, const Vec& v);

// ||A - A^T||_F <= tol * (1 + ||A||_F)
bool is_symmetric(const Matrix& m, double tol = 1e-12);
Matrix symmetrize(const Matrix& m);

// Vector helpers.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);

/// x = M \ b by LU with partial pivoting. Throws SingularMatrixError when a
/// pivot falls below 1e-13 * ||M||_F.
Vec solve_linear(const Matrix& m, const Vec& b);
Matrix solve_linear(const Matrix& m, const Matrix& rhs);
Matrix inverse(const Matrix& m);
double determinant(const Matrix& m);

/// Lower-triangular L with L L^T = M, or nullopt if M is not positive
/// definite. Failure is a decision outcome, not an error.
std::optional<Matrix> cholesky(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace gcon
