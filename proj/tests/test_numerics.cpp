#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "gcon/eig.hpp"
#include "gcon/matrix.hpp"

using namespace gcon;

namespace {

// Deterministic uniform double in [lo, hi); avoids std::uniform_real_distribution
// so sequences are identical across standard library implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                     double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = uniform(rng, lo, hi);
    return m;
}

// Random symmetric matrix with prescribed eigenvalues: Q diag(l) Q^T from the
// QR-free route of symmetrizing and re-extracting an orthonormal basis.
Matrix random_symmetric_with_spectrum(std::mt19937_64& rng, const Vec& eigs) {
    const std::size_t n = eigs.size();
    const Matrix g = random_matrix(rng, n, n);
    const SymmetricEig basis = sym_eig(symmetrize(g * transpose(g) + Matrix::identity(n)));
    const Matrix& q = basis.eigenvectors;
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = eigs[i];
    return symmetrize(q * d * transpose(q));
}

// Naive Gaussian elimination, independent of the library LU path.
Vec brute_solve(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

// Brute-force Lyapunov oracle: assemble the d^2 linear system with plain
// loops (no Kronecker helper) and eliminate naively.
Matrix brute_lyapunov(const Matrix& f, const Matrix& w) {
    const std::size_t d = f.rows();
    Matrix sys(d * d, d * d);
    // Row (i,j) of F^T X + X F = -W:  sum_k F(k,i) X(k,j) + sum_k X(i,k) F(k,j)
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t row = i * d + j;
            for (std::size_t k = 0; k < d; ++k) {
                sys(row, k * d + j) += f(k, i);
                sys(row, i * d + k) += f(k, j);
            }
        }
    Vec rhs(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) rhs[i * d + j] = -w(i, j);
    const Vec xv = brute_solve(sys, rhs);
    Matrix x(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = xv[i * d + j];
    return x;
}

double eig_reconstruction_error(const Matrix& m, const SymmetricEig& e) {
    const std::size_t n = m.rows();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Vec v(n), mv(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = e.eigenvectors(i, j);
        mv = mat_vec(m, v);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = mv[i] - e.eigenvalues[j] * v[i];
            err += r * r;
        }
        worst = std::max(worst, std::sqrt(err) / (1.0 + std::abs(e.eigenvalues[j])));
    }
    return worst;
}

}  // namespace

TEST_CASE("sym_eig: diagonal matrix") {
    const Matrix m{{2, 0}, {0, 3}};
    const SymmetricEig e = sym_eig(m);
    CHECK(e.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(std::abs(e.eigenvectors(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("sym_eig: path-graph P3 Laplacian has spectrum 0,1,3") {
    // Characteristic polynomial lambda (lambda-1) (lambda-3) expanded by hand.
    const Matrix m{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
    const SymmetricEig e = sym_eig(m);
    CHECK(std::abs(e.eigenvalues[0] - 0.0) < 1e-10);
    CHECK(std::abs(e.eigenvalues[1] - 1.0) < 1e-10);
    CHECK(std::abs(e.eigenvalues[2] - 3.0) < 1e-10);
}

TEST_CASE("sym_eig: K3 Laplacian has spectrum 0,3,3") {
    const Matrix m{{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}};
    const SymmetricEig e = sym_eig(m);
    CHECK(std::abs(e.eigenvalues[0] - 0.0) < 1e-10);
    CHECK(std::abs(e.eigenvalues[1] - 3.0) < 1e-10);
    CHECK(std::abs(e.eigenvalues[2] - 3.0) < 1e-10);
}

TEST_CASE("sym_eig: rejects asymmetric input") {
    const Matrix m{{1, 2}, {0, 1}};
    CHECK_THROWS_AS(sym_eig(m), NonSymmetricError);
}

TEST_CASE("sym_eig: randomized reconstruction, orthonormality, trace") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 7);
        const Matrix g = random_matrix(rng, n, n, -2.0, 2.0);
        const Matrix m = symmetrize(g + transpose(g));
        const SymmetricEig e = sym_eig(m);

        CHECK(eig_reconstruction_error(m, e) < 1e-9 * (1.0 + frobenius_norm(m)));

        const Matrix vtv = transpose(e.eigenvectors) * e.eigenvectors;
        CHECK(frobenius_norm(vtv - Matrix::identity(n)) < 1e-10);

        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            CHECK(e.eigenvalues[i] <= e.eigenvalues[i + 1]);
        for (double l : e.eigenvalues) sum += l;
        CHECK(std::abs(sum - trace(m)) <= 1e-9 * (1.0 + std::abs(trace(m))));

        // Full reconstruction V diag V^T.
        Matrix d(n, n);
        for (std::size_t i = 0; i < n; ++i) d(i, i) = e.eigenvalues[i];
        const Matrix rec = e.eigenvectors * d * transpose(e.eigenvectors);
        CHECK(frobenius_norm(rec - m) < 1e-9 * (1.0 + frobenius_norm(m)));
    }
}

TEST_CASE("solve_linear: identity and diagonal") {
    const Vec b{2.0, 8.0};
    CHECK(solve_linear(Matrix::identity(2), b) == b);
    const Vec x = solve_linear(Matrix{{2, 0}, {0, 4}}, b);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("solve_linear: recovers constructed solution on random 5x5") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(rng, 5, 5) + 5.0 * Matrix::identity(5);
        Vec xstar(5);
        for (auto& v : xstar) v = uniform(rng, -3.0, 3.0);
        const Vec b = mat_vec(m, xstar);
        const Vec x = solve_linear(m, b);
        double err = 0.0;
        for (std::size_t i = 0; i < 5; ++i) err = std::max(err, std::abs(x[i] - xstar[i]));
        CHECK(err < 1e-9);
        const Vec mx = mat_vec(m, x);
        double res = 0.0;
        for (std::size_t i = 0; i < 5; ++i) res += (mx[i] - b[i]) * (mx[i] - b[i]);
        CHECK(std::sqrt(res) <= 1e-10 * (1.0 + norm2(b)));
    }
}

TEST_CASE("solve_linear: singular matrix throws") {
    const Matrix m{{1, 2}, {2, 4}};
    CHECK_THROWS_AS(solve_linear(m, Vec{1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("cholesky: identity, hand-expanded 2x2, indefinite failure") {
    const auto li = cholesky(Matrix::identity(3));
    REQUIRE(li.has_value());
    CHECK(frobenius_norm(*li - Matrix::identity(3)) < 1e-14);

    // [[4,2],[2,3]] = L L^T with L = [[2,0],[1,sqrt(2)]].
    const auto l = cholesky(Matrix{{4, 2}, {2, 3}});
    REQUIRE(l.has_value());
    CHECK((*l)(0, 0) == doctest::Approx(2.0));
    CHECK((*l)(1, 0) == doctest::Approx(1.0));
    CHECK((*l)(1, 1) == doctest::Approx(std::sqrt(2.0)));

    // Eigenvalues 3 and -1.
    CHECK(!cholesky(Matrix{{1, 2}, {2, 1}}).has_value());
}

TEST_CASE("cholesky: succeeds iff min eigenvalue positive (randomized)") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 5);
        Vec eigs(n);
        for (auto& l : eigs) {
            l = uniform(rng, 0.1, 4.0);
            if (rng() % 3 == 0) l = -l;
        }
        const Matrix m = random_symmetric_with_spectrum(rng, eigs);
        const SymmetricEig e = sym_eig(m);
        const bool pd = e.eigenvalues.front() > 0.0;
        CHECK(cholesky(m).has_value() == pd);
        if (pd) {
            const Matrix l = *cholesky(m);
            CHECK(frobenius_norm(l * transpose(l) - m) <= 1e-10 * (1.0 + frobenius_norm(m)));
        }
    }
}

TEST_CASE("solve_lyapunov: closed forms") {
    // F = -I2, W = 2 I2  ->  -2X + 2I = 0  ->  X = I.
    const Matrix x1 = solve_lyapunov(-1.0 * Matrix::identity(2), 2.0 * Matrix::identity(2));
    CHECK(frobenius_norm(x1 - Matrix::identity(2)) < 1e-12);

    // Scalar -2x + 6 = 0.
    const Matrix x2 = solve_lyapunov(Matrix{{-1}}, Matrix{{6}});
    CHECK(x2(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("solve_lyapunov: matches brute-force Kronecker solve, d <= 4") {
    std::mt19937_64 rng(17);
    // The spec's fixed instance first.
    {
        const Matrix f{{-1, 1}, {0, -2}};
        const Matrix w = Matrix::identity(2);
        const Matrix x = solve_lyapunov(f, w);
        const Matrix xb = brute_lyapunov(f, w);
        CHECK(frobenius_norm(x - xb) < 1e-9);
    }
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng() % 4);
        // Hurwitz by diagonal dominance shift.
        const Matrix f = random_matrix(rng, d, d) - 3.0 * Matrix::identity(d);
        const Matrix w = symmetrize(random_matrix(rng, d, d));
        const Matrix x = solve_lyapunov(f, w);
        const Matrix xb = brute_lyapunov(f, w);
        CHECK(frobenius_norm(x - xb) < 1e-9);
        const Matrix res = transpose(f) * x + x * f + w;
        CHECK(frobenius_norm(res) <= 1e-9 * (1.0 + frobenius_norm(w)));
        CHECK(is_symmetric(x));
    }
}

TEST_CASE("solve_lyapunov: non-Hurwitz rejected") {
    CHECK_THROWS_AS(solve_lyapunov(Matrix{{0.0}}, Matrix{{1.0}}), NotHurwitzError);
    CHECK_THROWS_AS(solve_lyapunov(Matrix{{1, 0}, {0, -1}}, Matrix::identity(2)),
                    NotHurwitzError);
}

TEST_CASE("kron: block structure and mixed-product property") {
    const Matrix m{{1, 2}, {3, 4}};
    const Matrix bd = kron(Matrix::identity(2), m);
    CHECK(bd.rows() == 4);
    CHECK(bd(0, 0) == 1);
    CHECK(bd(2, 2) == 1);
    CHECK(bd(0, 2) == 0);
    CHECK(bd(3, 2) == 3);

    const Matrix ones = kron(Matrix{{1}, {1}} * 1.0, Matrix{{1}});
    CHECK(ones.rows() == 2);

    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix p = random_matrix(rng, 2, 2);
        const Matrix q = random_matrix(rng, 2, 2);
        const Matrix r = random_matrix(rng, 2, 2);
        const Matrix s = random_matrix(rng, 2, 2);
        const Matrix lhs = kron(p, q) * kron(r, s);
        const Matrix rhs = kron(p * r, q * s);
        CHECK(frobenius_norm(lhs - rhs) < 1e-12 * (1.0 + frobenius_norm(rhs)));
    }
}

TEST_CASE("rank_of: identity, outer product, controllability oracle") {
    CHECK(rank_of(Matrix::identity(3), 1e-9) == 3);
    CHECK(rank_of(Matrix{{1, 2}, {2, 4}}, 1e-9) == 1);
    CHECK(rank_of(Matrix::zeros(3, 2), 1e-9) == 0);

    // Controllable pair: [B, AB] full rank implies rank [A - l I, B] = d at
    // every eigenvalue.
    const Matrix a{{0, 1}, {0, 0}};
    const Matrix b{{0}, {1}};
    Matrix ctrb(2, 2);
    const Matrix ab = a * b;
    ctrb(0, 0) = b(0, 0);
    ctrb(1, 0) = b(1, 0);
    ctrb(0, 1) = ab(0, 0);
    ctrb(1, 1) = ab(1, 0);
    REQUIRE(rank_of(ctrb, 1e-9) == 2);
    for (const auto& l : eig_values(a)) {
        Matrix pbh(2, 3);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j)
                pbh(i, j) = a(i, j) - (i == j ? l.real() : 0.0);
            pbh(i, 2) = b(i, 0);
        }
        CHECK(rank_of(pbh, 1e-9) == 2);
    }
}

TEST_CASE("eig_values: fixed small cases") {
    // Rotation-like block: eigenvalues +-i.
    const auto e1 = eig_values(Matrix{{0, 1}, {-1, 0}});
    CHECK(std::abs(e1[0] - std::complex<double>(0, -1)) < 1e-12);
    CHECK(std::abs(e1[1] - std::complex<double>(0, 1)) < 1e-12);

    // Jordan block: double zero.
    const auto e2 = eig_values(Matrix{{0, 1}, {0, 0}});
    CHECK(std::abs(e2[0]) < 1e-7);
    CHECK(std::abs(e2[1]) < 1e-7);

    // Companion matrix of (l-1)(l-2)(l-3).
    const Matrix comp{{6, -11, 6}, {1, 0, 0}, {0, 1, 0}};
    const auto e3 = eig_values(comp);
    CHECK(std::abs(e3[0] - 1.0) < 1e-8);
    CHECK(std::abs(e3[1] - 2.0) < 1e-8);
    CHECK(std::abs(e3[2] - 3.0) < 1e-8);
}

TEST_CASE("eig_values: agrees with Jacobi on random symmetric matrices") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 6);
        const Matrix g = random_matrix(rng, n, n, -2.0, 2.0);
        const Matrix m = symmetrize(g + transpose(g));
        const SymmetricEig js = sym_eig(m);
        const auto qs = eig_values(m);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(qs[i].imag()) < 1e-8 * (1.0 + frobenius_norm(m)));
            CHECK(std::abs(qs[i].real() - js.eigenvalues[i]) <
                  1e-8 * (1.0 + frobenius_norm(m)));
        }
    }
}

TEST_CASE("eig_values: characteristic polynomial backward error, random") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 7);
        const Matrix m = random_matrix(rng, n, n, -2.0, 2.0);
        const auto eigs = eig_values(m);
        REQUIRE(eigs.size() == n);
        // det(M - l I) evaluated by complex Gaussian elimination at each
        // computed eigenvalue; characteristic polynomial root means ~0.
        for (const auto& l : eigs) {
            std::vector<std::complex<double>> a(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    a[i * n + j] = std::complex<double>(m(i, j), 0.0) -
                                   (i == j ? l : std::complex<double>(0.0));
            std::complex<double> det(1.0, 0.0);
            double scale = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                std::size_t piv = k;
                for (std::size_t i = k + 1; i < n; ++i)
                    if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
                if (piv != k) {
                    for (std::size_t j = 0; j < n; ++j)
                        std::swap(a[k * n + j], a[piv * n + j]);
                    det = -det;
                }
                det *= a[k * n + k];
                scale *= std::max(1.0, frobenius_norm(m));
                if (std::abs(a[k * n + k]) == 0.0) break;
                for (std::size_t i = k + 1; i < n; ++i) {
                    const std::complex<double> f = a[i * n + k] / a[k * n + k];
                    for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
                }
            }
            CHECK(std::abs(det) < 1e-7 * scale);
        }
    }
}

TEST_CASE("is_hurwitz and max_real_eig") {
    CHECK(is_hurwitz(-1.0 * Matrix::identity(3)));
    CHECK(!is_hurwitz(Matrix{{0, 1}, {-1, 0}}));  // marginal
    CHECK(!is_hurwitz(Matrix{{1}}));
    CHECK(max_real_eig(Matrix{{-2, 0}, {0, -5}}) == doctest::Approx(-2.0));
}

TEST_CASE("matrix construction validates finiteness and shape") {
    CHECK_THROWS_AS(Matrix(2, 2, Vec{1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 1, Vec{std::nan("")}), ValidationError);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionError);
}
