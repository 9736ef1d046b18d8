#include "gcon/synthesis.hpp"

#include <cmath>
#include <string>

#include "gcon/eig.hpp"

namespace gcon {

std::string to_string(SynthesisMode mode) {
    return mode == SynthesisMode::nonlinear_thm2 ? "nonlinear_thm2" : "linear_thm3";
}

namespace {

void check_cost_matrix(const Matrix& m, std::size_t dim, const char* name) {
    if (m.rows() != dim || m.cols() != dim)
        throw BadCostMatrixError(std::string(name) + " has wrong dimensions");
    if (!is_symmetric(m))
        throw BadCostMatrixError(std::string(name) + " is not symmetric");
    if (!cholesky(symmetrize(m)).has_value())
        throw BadCostMatrixError(std::string(name) + " is not positive definite");
}

}  // namespace

RiccatiProblem build_riccati(const AgentModel& m, const CostWeights& cost,
                             const SpectralBounds& bounds, SynthesisMode mode) {
    check_cost_matrix(cost.Q, m.d, "Q");
    check_cost_matrix(cost.R, m.p, "R");
    if (!(bounds.lambda_min > 0.0) || bounds.lambda_max < bounds.lambda_min)
        throw ValidationError("build_riccati: need lambda_max >= lambda_min > 0");

    const Matrix bt = transpose(m.B);
    const double lmax2 = bounds.lambda_max * bounds.lambda_max;
    Matrix quad = lmax2 * (m.B * cost.R * bt) - (2.0 * bounds.lambda_min) * (m.B * bt);
    Matrix constant = (3.0 * bounds.lambda_max) * cost.Q;
    if (mode == SynthesisMode::nonlinear_thm2) {
        quad += Matrix::identity(m.d);
        constant += (m.f.gamma * m.f.gamma) * Matrix::identity(m.d);
    }

    RiccatiProblem prob;
    prob.A = m.A;
    prob.B = m.B;
    prob.M = symmetrize(quad);
    prob.NQ = symmetrize(constant);
    prob.mode = mode;
    prob.provenance = RiccatiProblem::Provenance{
        bounds.lambda_min, bounds.lambda_max, m.f.gamma, cost.Q, cost.R};
    return prob;
}

double riccati_residual(const RiccatiProblem& prob, const Matrix& p) {
    const Matrix xi = transpose(prob.A) * p + p * prob.A + p * prob.M * p + prob.NQ;
    return frobenius_norm(xi);
}

namespace {

// Splits M into a negative-semidefinite base and the remainder that the
// homotopy blends back in. With provenance the split follows the formula
// structure (-2 lambda_min B B^T base); otherwise it is spectral.
void split_quadratic_term(const RiccatiProblem& prob, Matrix& m_minus, Matrix& m_plus) {
    if (prob.provenance) {
        const Matrix bbt = prob.B * transpose(prob.B);
        m_minus = (-2.0 * prob.provenance->lambda_min) * bbt;
        m_plus = prob.M - m_minus;
        return;
    }
    const SymmetricEig e = sym_eig(prob.M);
    const std::size_t d = prob.M.rows();
    Matrix dneg(d, d), dpos(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        dneg(i, i) = std::min(e.eigenvalues[i], 0.0);
        dpos(i, i) = std::max(e.eigenvalues[i], 0.0);
    }
    const Matrix vt = transpose(e.eigenvectors);
    m_minus = symmetrize(e.eigenvectors * dneg * vt);
    m_plus = symmetrize(e.eigenvectors * dpos * vt);
}

struct NkOutcome {
    bool ok = false;
    Matrix p;
    double last_residual = 0.0;
};

double residual_norm(const Matrix& a, const Matrix& m, const Matrix& nq, const Matrix& p) {
    return frobenius_norm(transpose(a) * p + p * a + p * m * p + nq);
}

// Newton-Kleinman on A^T P + P A + P M P + NQ = 0 from a stabilizing start:
// each step solves (A + M P_k)^T P_{k+1} + P_{k+1} (A + M P_k) = -(NQ - P_k M P_k),
// with step damping whenever the full update leaves the stabilizing set.
NkOutcome newton_kleinman(const Matrix& a, const Matrix& m, const Matrix& nq,
                          const Matrix& p0, int max_iters) {
    NkOutcome out;
    Matrix p = p0;
    out.last_residual = residual_norm(a, m, nq, p);
    if (!is_hurwitz(a + m * p)) return out;

    for (int k = 0; k < max_iters; ++k) {
        const Matrix f = a + m * p;
        Matrix next;
        try {
            next = solve_lyapunov(f, nq - p * m * p);
        } catch (const Error&) {
            return out;
        }
        if (!all_finite(next) || frobenius_norm(next) > 1e14) return out;

        double alpha = 1.0;
        Matrix cand = next;
        bool stabilizing = is_hurwitz(a + m * cand);
        while (!stabilizing && alpha > 1e-9) {
            alpha *= 0.5;
            cand = p + alpha * (next - p);
            stabilizing = is_hurwitz(a + m * cand);
        }
        if (!stabilizing) return out;

        const double step = frobenius_norm(cand - p);
        p = cand;
        out.last_residual = residual_norm(a, m, nq, p);
        if (step <= 1e-12 * (1.0 + frobenius_norm(p))) {
            // A stalled damped step can stop making progress away from any
            // solution; success requires the residual to actually vanish.
            out.ok = out.last_residual <= 1e-8 * (1.0 + frobenius_norm(p));
            out.p = p;
            return out;
        }
    }
    return out;  // iteration cap
}

// Stabilizing initial guess for the negative-semidefinite stage. Solves the
// shifted Lyapunov equation (A + beta I) Z + Z (A + beta I)^T = -M_minus + eps I
// and inverts; retries over a small ladder of regularizations until the
// closed loop verifies Hurwitz.
std::optional<Matrix> stabilizing_init(const Matrix& a, const Matrix& m_minus) {
    const std::size_t d = a.rows();
    if (is_hurwitz(a, 1e-9)) return Matrix::zeros(d, d);

    double max_abs_re = 0.0;
    for (const auto& l : eig_values(a)) max_abs_re = std::max(max_abs_re, std::abs(l.real()));
    const double scale = std::max(1.0, frobenius_norm(m_minus));

    for (double beta_mult : {1.0, 4.0, 16.0}) {
        const double beta = beta_mult * (1.0 + max_abs_re);
        for (double eps : {1e-6, 1e-3, 1e-1}) {
            const Matrix w = -1.0 * m_minus + (eps * scale) * Matrix::identity(d);
            const Matrix f = -1.0 * transpose(a) - beta * Matrix::identity(d);
            Matrix z;
            try {
                z = solve_lyapunov(f, w);
            } catch (const Error&) {
                continue;
            }
            Matrix p0;
            try {
                p0 = symmetrize(inverse(z));
            } catch (const Error&) {
                continue;
            }
            if (is_hurwitz(a + m_minus * p0)) return p0;
        }
    }
    return std::nullopt;
}

// Matrix-sign solve of the Hamiltonian [[A, M], [-NQ, -A^T]]; returns the
// stabilizing solution when the sign iteration converges and the extracted
// P closes the loop.
std::optional<Matrix> hamiltonian_sign_solve(const Matrix& a, const Matrix& m,
                                             const Matrix& nq) {
    const std::size_t d = a.rows();
    Matrix h(2 * d, 2 * d);
    const Matrix at = transpose(a);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            h(i, j) = a(i, j);
            h(i, d + j) = m(i, j);
            h(d + i, j) = -nq(i, j);
            h(d + i, d + j) = -at(i, j);
        }

    Matrix z = h;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        const double det = determinant(z);
        if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
        const double c = std::pow(std::abs(det), -1.0 / static_cast<double>(2 * d));
        if (std::isfinite(c) && c > 0.0) z *= c;
        Matrix zinv;
        try {
            zinv = inverse(z);
        } catch (const Error&) {
            return std::nullopt;
        }
        const Matrix znew = 0.5 * (z + zinv);
        const double change = frobenius_norm(znew - z);
        z = znew;
        if (!all_finite(z)) return std::nullopt;
        if (change <= 1e-12 * (1.0 + frobenius_norm(z))) {
            converged = true;
            break;
        }
    }
    if (!converged) return std::nullopt;

    // (S + I)[U1; U2] = 0 for the stable subspace; with P = U2 U1^{-1} this
    // stacks to [S12; S22 + I] P = [-(S11 + I); -S21], solved in the normal
    // equations (consistent overdetermined system at tiny scale).
    Matrix lhs(2 * d, d), rhs(2 * d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lhs(i, j) = z(i, d + j);
            lhs(d + i, j) = z(d + i, d + j) + (i == j ? 1.0 : 0.0);
            rhs(i, j) = -(z(i, j) + (i == j ? 1.0 : 0.0));
            rhs(d + i, j) = -z(d + i, j);
        }
    const Matrix lt = transpose(lhs);
    Matrix p;
    try {
        p = solve_linear(lt * lhs, lt * rhs);
    } catch (const Error&) {
        return std::nullopt;
    }
    p = symmetrize(p);
    if (!all_finite(p) || !is_hurwitz(a + m * p)) return std::nullopt;
    return p;
}

}  // namespace

SynthesisResult solve_care(const RiccatiProblem& prob) {
    const std::size_t d = prob.A.rows();
    if (prob.M.rows() != d || prob.NQ.rows() != d)
        throw DimensionError("solve_care: A, M, NQ dimensions disagree");
    if (!is_symmetric(prob.M) || !is_symmetric(prob.NQ))
        throw NonSymmetricError("solve_care: M and NQ must be symmetric");

    Matrix m_minus, m_plus;
    split_quadratic_term(prob, m_minus, m_plus);
    const bool trivial_plus = frobenius_norm(m_plus) == 0.0;

    int stage = 0;
    double last_residual = riccati_residual(prob, Matrix::zeros(d, d));

    Matrix p;
    bool have_p = false;
    const std::vector<double> thetas =
        trivial_plus ? std::vector<double>{1.0}
                     : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};

    for (double theta : thetas) {
        const Matrix m_theta = symmetrize(m_minus + theta * m_plus);

        Matrix start;
        bool have_start = false;
        if (have_p && is_hurwitz(prob.A + m_theta * p)) {
            start = p;
            have_start = true;
        } else if (!have_p) {
            if (auto p0 = stabilizing_init(prob.A, m_minus);
                p0 && is_hurwitz(prob.A + m_theta * *p0)) {
                start = *p0;
                have_start = true;
            }
        }

        bool stage_done = false;
        if (have_start) {
            const NkOutcome nk = newton_kleinman(prob.A, m_theta, prob.NQ, start, 200);
            if (nk.ok) {
                p = nk.p;
                have_p = true;
                stage_done = true;
            }
            last_residual = nk.last_residual;
        }
        if (!stage_done) {
            if (auto ps = hamiltonian_sign_solve(prob.A, m_theta, prob.NQ)) {
                // Polish the subspace solve with a few Newton steps.
                const NkOutcome nk = newton_kleinman(prob.A, m_theta, prob.NQ, *ps, 50);
                p = nk.ok ? nk.p : *ps;
                have_p = true;
                stage_done = true;
                last_residual = residual_norm(prob.A, m_theta, prob.NQ, p);
            }
        }
        if (!stage_done)
            throw CareError(CareError::Reason::no_stabilizing_solution,
                            "solve_care: no stabilizing solution at homotopy stage " +
                                std::to_string(stage) + " (theta = " +
                                std::to_string(theta) + ")",
                            last_residual, stage);
        ++stage;
    }

    const double res = riccati_residual(prob, p);
    if (!(res <= 1e-8 * (1.0 + frobenius_norm(p))))
        throw CareError(CareError::Reason::no_stabilizing_solution,
                        "solve_care: converged iterate has residual " +
                            std::to_string(res),
                        res, stage);
    if (!is_hurwitz(prob.A + prob.M * p))
        throw CareError(CareError::Reason::no_stabilizing_solution,
                        "solve_care: final closed loop is not Hurwitz", res, stage);
    if (!cholesky(p).has_value())
        throw CareError(CareError::Reason::not_positive_definite,
                        "solve_care: solution is not positive definite", res, stage);

    SynthesisResult out;
    out.P = p;
    out.K = transpose(prob.B) * p;
    out.residual = res;
    out.mode = prob.mode;
    return out;
}

double guaranteed_cost(const Matrix& p, const Vec& x0, std::size_t n_agents) {
    const std::size_t d = p.rows();
    if (x0.size() != n_agents * d)
        throw DimensionError("guaranteed_cost: x0 length != N*d");
    // (1/N)(N I - 1 1^T) (x) P applied through the deviation-from-mean form.
    Vec mean(d, 0.0);
    for (std::size_t a = 0; a < n_agents; ++a)
        for (std::size_t k = 0; k < d; ++k) mean[k] += x0[a * d + k];
    for (double& v : mean) v /= static_cast<double>(n_agents);

    double beta = 0.0;
    Vec y(d);
    for (std::size_t a = 0; a < n_agents; ++a) {
        for (std::size_t k = 0; k < d; ++k) y[k] = x0[a * d + k] - mean[k];
        beta += dot(y, mat_vec(p, y));
    }
    return beta;
}

double guaranteed_cost(const SynthesisResult& res, const Vec& x0, std::size_t n_agents) {
    return guaranteed_cost(res.P, x0, n_agents);
}

Theorem3Report theorem3_check(const AgentModel& m, const CostWeights& cost,
                              const SpectralBounds& bounds) {
    if (m.f.kind != NonlinearitySpec::Kind::zero)
        throw NonlinearModelError("theorem3_check: model nonlinearity is not zero");
    check_cost_matrix(cost.Q, m.d, "Q");
    check_cost_matrix(cost.R, m.p, "R");

    Theorem3Report rep;
    rep.lambda_R_max = sym_eig(cost.R).eigenvalues.back();
    rep.threshold = 2.0 * bounds.lambda_min / (bounds.lambda_max * bounds.lambda_max);
    rep.stabilizable = check_stabilizable(m).ok;
    rep.condition_ok = rep.lambda_R_max < rep.threshold && rep.stabilizable;

    if (rep.condition_ok) {
        const Matrix bt = transpose(m.B);
        const Matrix quad = bounds.lambda_max * bounds.lambda_max * (m.B * cost.R * bt) -
                            2.0 * bounds.lambda_min * (m.B * bt);
        const Vec eigs = sym_eig(symmetrize(quad)).eigenvalues;
        rep.m_negative_semidefinite =
            eigs.back() <= 1e-10 * (1.0 + frobenius_norm(quad));
    }
    return rep;
}

}  // namespace gcon
