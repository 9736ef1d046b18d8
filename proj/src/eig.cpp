#include "gcon/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gcon {

namespace {

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace

SymmetricEig sym_eig(const Matrix& m) {
    if (m.rows() != m.cols())
        throw NonSymmetricError("sym_eig: matrix not square");
    if (!is_symmetric(m))
        throw NonSymmetricError("sym_eig: matrix not symmetric within tolerance");

    const std::size_t n = m.rows();
    Matrix a = symmetrize(m);
    Matrix v = Matrix::identity(n);
    const double stop = 1e-12 * frobenius_norm(m);

    bool converged = (n < 2) || off_diagonal_norm(a) <= stop;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(a) <= stop;
    }
    if (!converged)
        throw ConvergenceError("sym_eig: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymmetricEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

namespace {

using Cplx = std::complex<double>;

// Row-major complex working matrix for the Hessenberg QR iteration.
class CWork {
public:
    explicit CWork(const Matrix& a) : n_(a.rows()), h_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                h_[i * n_ + j] = Cplx(a(i, j), 0.0);
    }
    Cplx& operator()(std::size_t i, std::size_t j) { return h_[i * n_ + j]; }
    const Cplx& operator()(std::size_t i, std::size_t j) const { return h_[i * n_ + j]; }
    std::size_t n() const { return n_; }

private:
    std::size_t n_;
    std::vector<Cplx> h_;
};

// Householder similarity reduction to upper Hessenberg form.
void hessenberg(CWork& h) {
    const std::size_t n = h.n();
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
        if (scale == 0.0) continue;

        std::vector<Cplx> v(n - k - 1);
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i - k - 1] = h(i, k) / scale;
            vnorm2 += std::norm(v[i - k - 1]);
        }
        const double alpha = std::sqrt(vnorm2);
        if (alpha == 0.0) continue;
        const Cplx x0 = v[0];
        const Cplx phase = (std::abs(x0) == 0.0) ? Cplx(1.0, 0.0) : x0 / std::abs(x0);
        v[0] += phase * alpha;
        double vv = 0.0;
        for (const Cplx& c : v) vv += std::norm(c);
        if (vv == 0.0) continue;

        // H <- (I - 2 v v^H / v^H v) H
        for (std::size_t j = k; j < n; ++j) {
            Cplx s(0.0, 0.0);
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i - k - 1]) * h(i, j);
            s *= 2.0 / vv;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i - k - 1];
        }
        // H <- H (I - 2 v v^H / v^H v)
        for (std::size_t i = 0; i < n; ++i) {
            Cplx s(0.0, 0.0);
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j - k - 1];
            s *= 2.0 / vv;
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j - k - 1]);
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = Cplx(0.0, 0.0);
    }
}

// Unitary Givens pair (c real, s complex) zeroing y against x.
void givens(const Cplx& x, const Cplx& y, double& c, Cplx& s) {
    const double ax = std::abs(x), ay = std::abs(y);
    const double r = std::hypot(ax, ay);
    if (r == 0.0) {
        c = 1.0;
        s = Cplx(0.0, 0.0);
        return;
    }
    if (ax == 0.0) {
        c = 0.0;
        s = std::conj(y) / ay;
        return;
    }
    c = ax / r;
    s = (x / ax) * std::conj(y) / r;
}

// Wilkinson shift from the trailing 2x2 of the active block.
Cplx wilkinson_shift(const CWork& h, std::size_t m) {
    const Cplx a = h(m - 1, m - 1);
    const Cplx b = h(m - 1, m);
    const Cplx c = h(m, m - 1);
    const Cplx d = h(m, m);
    const Cplx half = (a - d) * 0.5;
    const Cplx disc = std::sqrt(half * half + b * c);
    const Cplx l1 = d + half + disc;
    const Cplx l2 = d + half - disc;
    return (std::abs(l1 - d) <= std::abs(l2 - d)) ? l1 : l2;
}

// One explicit shifted QR step restricted to the block [l..m].
void qr_step(CWork& h, std::size_t l, std::size_t m, const Cplx& shift) {
    for (std::size_t i = l; i <= m; ++i) h(i, i) -= shift;

    std::vector<double> cs(m - l);
    std::vector<Cplx> sn(m - l);
    for (std::size_t k = l; k < m; ++k) {
        double c;
        Cplx s;
        givens(h(k, k), h(k + 1, k), c, s);
        cs[k - l] = c;
        sn[k - l] = s;
        for (std::size_t j = k; j <= m; ++j) {
            const Cplx t1 = h(k, j), t2 = h(k + 1, j);
            h(k, j) = c * t1 + s * t2;
            h(k + 1, j) = -std::conj(s) * t1 + c * t2;
        }
        h(k + 1, k) = Cplx(0.0, 0.0);
    }
    for (std::size_t k = l; k < m; ++k) {
        const double c = cs[k - l];
        const Cplx s = sn[k - l];
        // Row k+1 regains its subdiagonal entry here, restoring Hessenberg form.
        const std::size_t lo = l;
        const std::size_t hi = std::min(m, k + 1);
        for (std::size_t i = lo; i <= hi; ++i) {
            const Cplx t1 = h(i, k), t2 = h(i, k + 1);
            h(i, k) = c * t1 + std::conj(s) * t2;
            h(i, k + 1) = -s * t1 + c * t2;
        }
    }
    for (std::size_t i = l; i <= m; ++i) h(i, i) += shift;
}

}  // namespace

std::vector<std::complex<double>> eig_values(const Matrix& a) {
    if (a.rows() != a.cols())
        throw DimensionError("eig_values: matrix not square");
    const std::size_t n = a.rows();
    std::vector<Cplx> eigs;
    eigs.reserve(n);
    if (n == 0) return eigs;
    if (n == 1) return {Cplx(a(0, 0), 0.0)};

    CWork h(a);
    hessenberg(h);

    const double eps = std::numeric_limits<double>::epsilon();
    const double hnorm = std::max(1e-300, frobenius_norm(a));
    std::size_t m = n - 1;
    int iters_at_m = 0;
    long total_iters = 0;
    const long iter_cap = 60 * static_cast<long>(n);

    while (true) {
        for (std::size_t i = m; i >= 1; --i) {
            const double sub = std::abs(h(i, i - 1));
            const double local = std::abs(h(i - 1, i - 1)) + std::abs(h(i, i));
            if (sub <= eps * (local > 0.0 ? local : hnorm)) h(i, i - 1) = Cplx(0.0, 0.0);
        }
        while (m > 0 && h(m, m - 1) == Cplx(0.0, 0.0)) {
            eigs.push_back(h(m, m));
            --m;
            iters_at_m = 0;
        }
        if (m == 0) {
            eigs.push_back(h(0, 0));
            break;
        }

        std::size_t l = m;
        while (l > 0 && h(l, l - 1) != Cplx(0.0, 0.0)) --l;

        if (++total_iters > iter_cap)
            throw ConvergenceError("eig_values: QR iteration did not converge");

        Cplx shift = wilkinson_shift(h, m);
        if (++iters_at_m % 16 == 0)
            shift = h(m, m) + Cplx(0.75 * std::abs(h(m, m - 1)), 0.0);

        qr_step(h, l, m, shift);
    }

    std::sort(eigs.begin(), eigs.end(), [](const Cplx& x, const Cplx& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return eigs;
}

double max_real_eig(const Matrix& a) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& l : eig_values(a)) mx = std::max(mx, l.real());
    return mx;
}

bool is_hurwitz(const Matrix& a, double margin) {
    return max_real_eig(a) < -margin;
}

std::size_t rank_of(const Matrix& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    // Gram matrix on the smaller side keeps the eigenproblem compact.
    const Matrix mt = transpose(m);
    const Matrix gram = (m.rows() <= m.cols()) ? m * mt : mt * m;
    const SymmetricEig e = sym_eig(symmetrize(gram));
    double smax2 = 0.0;
    for (double l : e.eigenvalues) smax2 = std::max(smax2, l);
    if (smax2 <= 0.0) return 0;
    const double cut = tol * std::sqrt(smax2);
    std::size_t r = 0;
    for (double l : e.eigenvalues)
        if (l > 0.0 && std::sqrt(l) > cut) ++r;
    return r;
}

Matrix solve_lyapunov(const Matrix& f, const Matrix& w) {
    if (f.rows() != f.cols() || w.rows() != w.cols() || f.rows() != w.rows())
        throw DimensionError("solve_lyapunov: shape mismatch");
    const double mre = max_real_eig(f);
    if (mre >= -1e-10)
        throw NotHurwitzError("solve_lyapunov: coefficient matrix not Hurwitz "
                              "(max Re eig = " + std::to_string(mre) + ")",
                              mre);

    const std::size_t d = f.rows();
    const Matrix ft = transpose(f);
    const Matrix sys = kron(Matrix::identity(d), ft) + kron(ft, Matrix::identity(d));
    Vec rhs(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) rhs[i * d + j] = -w(i, j);
    const Vec xv = solve_linear(sys, rhs);
    Matrix x(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = xv[i * d + j];
    return symmetrize(x);
}

}  // namespace gcon
