#include "gcon/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace gcon {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw DimensionError(what);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, Vec entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
    if (a_.size() != rows_ * cols_)
        throw DimensionError("matrix entry count does not match rows*cols");
    for (double v : a_)
        if (!std::isfinite(v)) throw ValidationError("matrix entry is not finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    a_.reserve(rows_ * cols_);
    for (const auto& row : init) {
        if (row.size() != cols_)
            throw DimensionError("ragged initializer list");
        for (double v : row) {
            if (!std::isfinite(v)) throw ValidationError("matrix entry is not finite");
            a_.push_back(v);
        }
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "matrix add: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, "matrix sub: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

Matrix Matrix::operator-() const {
    Matrix r = *this;
    for (double& v : r.a_) v = -v;
    return r;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    require(cols_ == rhs.rows_, "matrix mul: inner dimension mismatch");
    Matrix r(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = a_[i * cols_ + k];
            if (aik == 0.0) continue;
            const double* brow = &rhs.a_[k * rhs.cols_];
            double* rrow = &r.a_[i * rhs.cols_];
            for (std::size_t j = 0; j < rhs.cols_; ++j) rrow[j] += aik * brow[j];
        }
    }
    return r;
}

Matrix transpose(const Matrix& m) {
    Matrix r(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(j, i) = m(i, j);
    return r;
}

double trace(const Matrix& m) {
    require(m.rows() == m.cols(), "trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s = std::max(s, std::abs(v));
    return s;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data())
        if (!std::isfinite(v)) return false;
    return true;
}

Vec mat_vec(const Matrix& m, const Vec& v) {
    require(m.cols() == v.size(), "mat_vec: dimension mismatch");
    Vec r(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    double asym = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const double d = m(i, j) - m(j, i);
            asym += 2.0 * d * d;
        }
    return std::sqrt(asym) <= tol * (1.0 + frobenius_norm(m));
}

Matrix symmetrize(const Matrix& m) {
    require(m.rows() == m.cols(), "symmetrize: matrix not square");
    Matrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = 0.5 * (m(i, j) + m(j, i));
    return r;
}

double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

namespace {

// LU with partial pivoting, in place. Returns the permutation sign and the
// pivot order; throws when a pivot falls below the relative floor.
struct Lu {
    Matrix lu;
    std::vector<std::size_t> perm;
    int sign = 1;
};

Lu lu_factor(const Matrix& m) {
    require(m.rows() == m.cols(), "lu: matrix not square");
    const std::size_t n = m.rows();
    Lu f{m, std::vector<std::size_t>(n), 1};
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
    const double pivot_floor = 1e-13 * frobenius_norm(m);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best <= pivot_floor)
            throw SingularMatrixError("singular matrix in linear solve (pivot " +
                                      std::to_string(best) + ")");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            f.sign = -f.sign;
        }
        const double d = f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = f.lu(i, k) / d;
            f.lu(i, k) = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
        }
    }
    return f;
}

Vec lu_solve(const Lu& f, const Vec& b) {
    const std::size_t n = f.lu.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s / f.lu(i, i);
    }
    return x;
}

}  // namespace

Vec solve_linear(const Matrix& m, const Vec& b) {
    require(m.rows() == b.size(), "solve_linear: rhs length mismatch");
    return lu_solve(lu_factor(m), b);
}

Matrix solve_linear(const Matrix& m, const Matrix& rhs) {
    require(m.rows() == rhs.rows(), "solve_linear: rhs shape mismatch");
    const Lu f = lu_factor(m);
    Matrix x(m.cols(), rhs.cols());
    Vec col(m.rows());
    for (std::size_t j = 0; j < rhs.cols(); ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) col[i] = rhs(i, j);
        Vec sol = lu_solve(f, col);
        for (std::size_t i = 0; i < m.cols(); ++i) x(i, j) = sol[i];
    }
    return x;
}

Matrix inverse(const Matrix& m) {
    return solve_linear(m, Matrix::identity(m.rows()));
}

double determinant(const Matrix& m) {
    Lu f;
    try {
        f = lu_factor(m);
    } catch (const SingularMatrixError&) {
        return 0.0;
    }
    double det = f.sign;
    for (std::size_t i = 0; i < m.rows(); ++i) det *= f.lu(i, i);
    return det;
}

std::optional<Matrix> cholesky(const Matrix& m) {
    if (!is_symmetric(m))
        throw NonSymmetricError("cholesky: input is not symmetric");
    const std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

}  // namespace gcon
