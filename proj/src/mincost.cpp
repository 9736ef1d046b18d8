#include "gcon/mincost.hpp"

#include <cmath>
#include <string>

#include "gcon/eig.hpp"

namespace gcon {

LmiProblem make_lmi_problem(const AgentModel& m, const CostWeights& cost,
                            const SpectralBounds& bounds, bool paper_literal_lmi) {
    if (!(bounds.lambda_min > 0.0) || bounds.lambda_max < bounds.lambda_min)
        throw ValidationError("lmi: need lambda_max >= lambda_min > 0");
    if (!is_symmetric(cost.Q) || !cholesky(symmetrize(cost.Q)).has_value())
        throw BadCostMatrixError("Q is not symmetric positive definite");
    if (!is_symmetric(cost.R) || !cholesky(symmetrize(cost.R)).has_value())
        throw BadCostMatrixError("R is not symmetric positive definite");
    LmiProblem prob;
    prob.A = m.A;
    prob.B = m.B;
    prob.Q = cost.Q;
    prob.R = cost.R;
    prob.gamma = m.f.gamma;
    prob.lambda_min = bounds.lambda_min;
    prob.lambda_max = bounds.lambda_max;
    prob.paper_literal_lmi = paper_literal_lmi;
    return prob;
}

namespace {

std::size_t dim_of(const LmiProblem& prob) { return prob.A.rows(); }

// Constant (variable-independent) part of the LMI2 (1,1) block.
Matrix lmi2_const_block(const LmiProblem& prob) {
    const std::size_t d = dim_of(prob);
    const double sign = prob.paper_literal_lmi ? -1.0 : 1.0;
    const Matrix bt = transpose(prob.B);
    return symmetrize(sign * prob.lambda_max * prob.lambda_max * (prob.B * prob.R * bt) -
                      2.0 * prob.lambda_min * (prob.B * bt) + Matrix::identity(d));
}

}  // namespace

std::pair<Matrix, Matrix> assemble_lmis(const LmiProblem& prob, const Matrix& p_tilde,
                                        const Matrix& x_tilde) {
    const std::size_t d = dim_of(prob);
    if (p_tilde.rows() != d || p_tilde.cols() != d || x_tilde.rows() != d ||
        x_tilde.cols() != d)
        throw DimensionError("assemble_lmis: variables must be d x d");
    if (!is_symmetric(p_tilde, 1e-10) || !is_symmetric(x_tilde, 1e-10))
        throw NonSymmetricError("assemble_lmis: variables must be symmetric");

    Matrix lmi1(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lmi1(i, j) = x_tilde(i, j);
            lmi1(d + i, d + j) = p_tilde(i, j);
        }
    for (std::size_t i = 0; i < d; ++i) {
        lmi1(i, d + i) = 1.0;
        lmi1(d + i, i) = 1.0;
    }

    Matrix lmi2(3 * d, 3 * d);
    const Matrix b11 =
        symmetrize(p_tilde * transpose(prob.A) + prob.A * p_tilde + lmi2_const_block(prob));
    const Matrix b12 = (3.0 * prob.lambda_max) * (p_tilde * prob.Q);
    const Matrix b13 = prob.gamma * p_tilde;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lmi2(i, j) = b11(i, j);
            lmi2(i, d + j) = b12(i, j);
            lmi2(d + j, i) = b12(i, j);
            lmi2(i, 2 * d + j) = b13(i, j);
            lmi2(2 * d + j, i) = b13(i, j);
            lmi2(d + i, d + j) = -3.0 * prob.lambda_max * prob.Q(i, j);
        }
    for (std::size_t i = 0; i < d; ++i) lmi2(2 * d + i, 2 * d + i) = -1.0;
    return {lmi1, lmi2};
}

Matrix schur_reduced_lmi2(const LmiProblem& prob, const Matrix& p_tilde) {
    const Matrix b11 =
        symmetrize(p_tilde * transpose(prob.A) + prob.A * p_tilde + lmi2_const_block(prob));
    return symmetrize(b11 + 3.0 * prob.lambda_max * (p_tilde * prob.Q * p_tilde) +
                      prob.gamma * prob.gamma * (p_tilde * p_tilde));
}

namespace {

// Symmetric-matrix vectorization basis: diagonal entries then upper pairs.
struct SymBasis {
    std::size_t d;
    std::vector<std::pair<std::size_t, std::size_t>> idx;  // (i, j), i <= j

    explicit SymBasis(std::size_t d_) : d(d_) {
        for (std::size_t i = 0; i < d; ++i) idx.emplace_back(i, i);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) idx.emplace_back(i, j);
    }
    std::size_t size() const { return idx.size(); }

    Matrix unit(std::size_t k) const {
        Matrix e(d, d);
        const auto [i, j] = idx[k];
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        return e;
    }
};

struct BarrierState {
    Matrix p_tilde;
    Matrix x_tilde;
    double t = 0.0;  // phase-I slack; unused in phase II
};

// Shared Newton machinery for phase I (maximize t) and phase II (minimize
// trace X~). The two barrier cones are G1 = LMI1 - tI and G2 = -LMI2 - tI
// (t = 0 in phase II).
class BarrierSolver {
public:
    BarrierSolver(const LmiProblem& prob, bool phase_one)
        : prob_(prob), phase_one_(phase_one), basis_(dim_of(prob)) {
        const std::size_t d = basis_.d;
        nvars_ = 2 * basis_.size() + (phase_one_ ? 1 : 0);

        // Per-variable derivative blocks of the two cone matrices.
        d1_.resize(nvars_, Matrix(2 * d, 2 * d));
        d2_.resize(nvars_, Matrix(3 * d, 3 * d));
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            const Matrix e = basis_.unit(k);
            // P~ variable k
            {
                Matrix d1(2 * d, 2 * d);
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) d1(d + i, d + j) = e(i, j);
                d1_[k] = d1;

                Matrix d2(3 * d, 3 * d);
                const Matrix b11 = e * transpose(prob.A) + prob.A * e;
                const Matrix b12 = (3.0 * prob.lambda_max) * (e * prob.Q);
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) {
                        d2(i, j) = 0.5 * (b11(i, j) + b11(j, i));
                        d2(i, d + j) = b12(i, j);
                        d2(d + j, i) = b12(i, j);
                        d2(i, 2 * d + j) = prob.gamma * e(i, j);
                        d2(2 * d + j, i) = prob.gamma * e(i, j);
                    }
                // -LMI2 is the cone matrix, so negate.
                d2_[k] = -1.0 * d2;
            }
            // X~ variable k
            {
                Matrix d1(2 * d, 2 * d);
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) d1(i, j) = e(i, j);
                d1_[basis_.size() + k] = d1;
                // LMI2 does not involve X~.
            }
        }
        if (phase_one_) {
            d1_[nvars_ - 1] = -1.0 * Matrix::identity(2 * d);
            d2_[nvars_ - 1] = -1.0 * Matrix::identity(3 * d);
        }

        // Linear objective gradient: trace(X~) in phase II, -t in phase I.
        obj_grad_.assign(nvars_, 0.0);
        if (phase_one_) {
            obj_grad_[nvars_ - 1] = -1.0;
        } else {
            for (std::size_t k = 0; k < basis_.d; ++k)
                obj_grad_[basis_.size() + k] = 1.0;  // diagonal entries lead the basis
        }
    }

    std::pair<Matrix, Matrix> cones(const BarrierState& s) const {
        auto [lmi1, lmi2] = assemble_lmis(prob_, s.p_tilde, s.x_tilde);
        Matrix g1 = lmi1, g2 = -1.0 * lmi2;
        if (phase_one_) {
            for (std::size_t i = 0; i < g1.rows(); ++i) g1(i, i) -= s.t;
            for (std::size_t i = 0; i < g2.rows(); ++i) g2(i, i) -= s.t;
        }
        return {g1, g2};
    }

    bool strictly_feasible(const BarrierState& s) const {
        auto [g1, g2] = cones(s);
        return cholesky(symmetrize(g1)).has_value() &&
               cholesky(symmetrize(g2)).has_value();
    }

    double objective(const BarrierState& s) const {
        if (phase_one_) return -s.t;
        return trace(s.x_tilde);
    }

    double barrier_value(const BarrierState& s) const {
        auto [g1, g2] = cones(s);
        return -logdet(g1) - logdet(g2);
    }

    // One damped-Newton descent on objective + mu * barrier; returns false on
    // stall (no strictly feasible Armijo step).
    bool newton_stage(BarrierState& s, double mu, int max_iters) {
        for (int it = 0; it < max_iters; ++it) {
            auto [g1, g2] = cones(s);
            Matrix g1i, g2i;
            try {
                g1i = inverse(g1);
                g2i = inverse(g2);
            } catch (const SingularMatrixError&) {
                return false;  // iterate hugging the cone boundary
            }

            std::vector<Matrix> t1(nvars_), t2(nvars_);
            for (std::size_t k = 0; k < nvars_; ++k) {
                t1[k] = g1i * d1_[k];
                t2[k] = g2i * d2_[k];
            }
            Vec grad(nvars_);
            for (std::size_t k = 0; k < nvars_; ++k)
                grad[k] = obj_grad_[k] / mu - trace(t1[k]) - trace(t2[k]);
            Matrix hess(nvars_, nvars_);
            for (std::size_t k = 0; k < nvars_; ++k)
                for (std::size_t l = k; l < nvars_; ++l) {
                    double h = trace_prod(t1[k], t1[l]) + trace_prod(t2[k], t2[l]);
                    hess(k, l) = h;
                    hess(l, k) = h;
                }
            Vec step;
            {
                const double scale = std::max(1.0, max_abs(hess));
                double ridge = 0.0;
                bool solved = false;
                for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
                    Matrix hr = hess;
                    for (std::size_t k = 0; k < nvars_; ++k) hr(k, k) += ridge;
                    try {
                        step = solve_linear(hr, grad);
                        solved = true;
                    } catch (const SingularMatrixError&) {
                        ridge = (ridge == 0.0) ? 1e-12 * scale : 100.0 * ridge;
                    }
                }
                if (!solved) return false;
            }
            for (double& v : step) v = -v;

            double decrement = 0.0;
            for (std::size_t k = 0; k < nvars_; ++k) decrement -= grad[k] * step[k];
            if (decrement <= 1e-11) return true;  // stationary at this mu

            const double f0 = objective(s) / mu + barrier_value(s);
            double alpha = 1.0;
            bool accepted = false;
            while (alpha > 1e-13) {
                BarrierState cand = apply_step(s, step, alpha);
                if (strictly_feasible(cand)) {
                    const double f1 = objective(cand) / mu + barrier_value(cand);
                    if (f1 <= f0 - 0.25 * alpha * decrement) {
                        s = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) return false;  // stalled
        }
        return true;
    }

    BarrierState apply_step(const BarrierState& s, const Vec& step, double alpha) const {
        BarrierState out = s;
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            const auto [i, j] = basis_.idx[k];
            out.p_tilde(i, j) += alpha * step[k];
            if (i != j) out.p_tilde(j, i) += alpha * step[k];
            out.x_tilde(i, j) += alpha * step[basis_.size() + k];
            if (i != j) out.x_tilde(j, i) += alpha * step[basis_.size() + k];
        }
        if (phase_one_) out.t += alpha * step[nvars_ - 1];
        return out;
    }

private:
    static double logdet(const Matrix& g) {
        const auto l = cholesky(symmetrize(g));
        if (!l) return -1e300;  // outside the cone; rejected by feasibility checks
        double s = 0.0;
        for (std::size_t i = 0; i < l->rows(); ++i) s += std::log((*l)(i, i));
        return 2.0 * s;
    }

    static double trace_prod(const Matrix& a, const Matrix& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(j, i);
        return s;
    }

    const LmiProblem& prob_;
    bool phase_one_;
    SymBasis basis_;
    std::size_t nvars_ = 0;
    std::vector<Matrix> d1_, d2_;
    Vec obj_grad_;
};

double min_eig_sym(const Matrix& m) { return sym_eig(symmetrize(m)).eigenvalues.front(); }
double max_eig_sym(const Matrix& m) { return sym_eig(symmetrize(m)).eigenvalues.back(); }

}  // namespace

MinCostResult barrier_solve(const LmiProblem& prob, std::size_t n_agents) {
    const std::size_t d = dim_of(prob);
    if (n_agents < 2) throw ValidationError("barrier_solve: need at least two agents");

    // Phase I: maximize the joint margin t from an arbitrary symmetric start.
    BarrierState state;
    state.p_tilde = Matrix::identity(d);
    state.x_tilde = Matrix::identity(d);
    {
        BarrierSolver phase1(prob, true);
        auto [g1, g2] = assemble_lmis(prob, state.p_tilde, state.x_tilde);
        const double margin0 = std::min(min_eig_sym(g1), min_eig_sym(-1.0 * g2));
        state.t = margin0 - 0.1 * (1.0 + std::abs(margin0));
        const double t_accept = 1e-6;
        const double barrier_dim = static_cast<double>(5 * d);

        double mu = 1.0;
        for (int stage = 0; stage < 12; ++stage) {
            const bool progressed = phase1.newton_stage(state, mu, 60);
            if (state.t >= t_accept) break;  // strictly feasible point in hand
            // Suboptimality of the stage optimum is ~ mu * barrier dimension;
            // once t cannot reach positive territory the problem is decided.
            if (state.t + mu * barrier_dim < 0.0) break;
            if (!progressed) break;
            mu *= 0.1;
        }
        if (state.t <= 1e-9)
            throw InfeasibleError(
                "barrier_solve: no strictly feasible point (phase-I margin " +
                    std::to_string(state.t) + ")",
                state.t);
        state.t = 0.0;  // margins now live in the constraints themselves
    }

    // Phase II: minimize trace(X~) down the barrier path, keeping the last
    // iterate whose margins stay above the reporting floor.
    BarrierSolver phase2(prob, false);
    MinCostResult best{};
    bool have_best = false;
    bool stalled = false;
    double mu = 1.0;
    double mu_used = 1.0;
    double last_obj = trace(state.x_tilde);

    for (int stage = 0; stage < 9; ++stage) {
        if (!phase2.newton_stage(state, mu, 80)) stalled = true;

        auto [lmi1, lmi2] = assemble_lmis(prob, state.p_tilde, state.x_tilde);
        const double m1 = min_eig_sym(lmi1);
        const double m2 = max_eig_sym(lmi2);
        if (m1 >= 1e-9 && m2 <= -1e-9) {
            best.P_tilde = state.p_tilde;
            best.X_tilde = state.x_tilde;
            best.margin_lmi1 = m1;
            best.margin_lmi2 = m2;
            mu_used = mu;
            have_best = true;
        }
        last_obj = trace(state.x_tilde);
        if (stalled) break;
        mu *= 0.1;
    }
    (void)last_obj;

    if (!have_best)
        throw InfeasibleError("barrier_solve: no iterate met the margin floor", 0.0);

    best.K = transpose(prob.B) * inverse(best.P_tilde);
    best.beta_star = 0.5 * static_cast<double>(n_agents) * trace(best.X_tilde);
    best.mu_final = mu_used;
    best.gap_estimate = mu_used * static_cast<double>(5 * d);
    best.stalled = stalled;
    return best;
}

double min_guaranteed_cost(const MinCostResult& res, std::size_t n_agents) {
    return 0.5 * static_cast<double>(n_agents) * trace(res.X_tilde);
}

}  // namespace gcon
