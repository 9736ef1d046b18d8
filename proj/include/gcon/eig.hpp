#pragma once

#include <complex>
#include <vector>

#include "gcon/matrix.hpp"

namespace gcon {

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
struct SymmetricEig {
    Vec eigenvalues;
    Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

/// Cyclic Jacobi rotations. Converges when the off-diagonal Frobenius norm
/// drops below 1e-12 * ||M||_F; sweep cap 100.
/// Throws NonSymmetricError / ConvergenceError.
SymmetricEig sym_eig(const Matrix& m);

/// Eigenvalues of a general real square matrix: Householder reduction to
/// Hessenberg form followed by shifted QR in complex arithmetic.
/// Returned sorted by (real part, imaginary part). Throws ConvergenceError.
std::vector<std::complex<double>> eig_values(const Matrix& a);

double max_real_eig(const Matrix& a);

// All eigenvalue real parts < -margin.
bool is_hurwitz(const Matrix& a, double margin = 1e-10);

/// Rank as the number of singular values above tol * sigma_max, with the
/// singular values taken from the symmetric eigenproblem of the smaller Gram
/// matrix.
std::size_t rank_of(const Matrix& m, double tol = 1e-9);

/// Solves F^T X + X F + W = 0 through the Kronecker-vectorized linear system
/// (I (x) F^T + F^T (x) I) vec(X) = -vec(W); the result is symmetrized.
/// Requires F Hurwitz (throws NotHurwitzError otherwise).
Matrix solve_lyapunov(const Matrix& f, const Matrix& w);

}  // namespace gcon
