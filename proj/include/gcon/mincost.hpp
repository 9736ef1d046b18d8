#pragma once

#include <utility>

#include "gcon/matrix.hpp"
#include "gcon/model.hpp"
#include "gcon/synthesis.hpp"

namespace gcon {

/// Data for the trace-minimization pair of matrix inequalities in (P~, X~):
///   LMI1 = [[X~, I], [I, P~]] > 0
///   LMI2 = [[P~A^T + A P~ + s lmax^2 BRB^T - 2 lmin BB^T + I,  3 lmax P~Q,  gamma P~],
///           [*, -3 lmax Q, 0], [*, *, -I]] < 0
/// where s = +1 by default. The printed source carries s = -1 in the (1,1)
/// block; congruence with the Riccati form fixes s = +1, and the literal sign
/// stays available behind paper_literal_lmi for comparison.
struct LmiProblem {
    Matrix A;
    Matrix B;
    Matrix Q;
    Matrix R;
    double gamma = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool paper_literal_lmi = false;
};

LmiProblem make_lmi_problem(const AgentModel& m, const CostWeights& cost,
                            const SpectralBounds& bounds, bool paper_literal_lmi);

/// Exact block placement for the two inequalities at the given variables.
std::pair<Matrix, Matrix> assemble_lmis(const LmiProblem& prob, const Matrix& p_tilde,
                                        const Matrix& x_tilde);

/// Schur complement of LMI2 onto its (1,1) block:
///   B11 + 3 lmax P~ Q P~ + gamma^2 P~ P~.
/// With the corrected sign this equals P~ Xi(P~^{-1}) P~.
Matrix schur_reduced_lmi2(const LmiProblem& prob, const Matrix& p_tilde);

struct MinCostResult {
    Matrix P_tilde;
    Matrix X_tilde;
    Matrix K;           // B^T P~^{-1}
    double beta_star;   // 0.5 N trace(X~)
    double margin_lmi1; // min eig of LMI1 at the returned point
    double margin_lmi2; // max eig of LMI2 at the returned point
    double mu_final;
    double gap_estimate;  // mu_final * barrier dimension
    bool stalled = false; // Newton stopped progressing; point still feasible
};

/// Log-barrier interior point: phase-I maximizes the joint margin t
/// (InfeasibleError when its optimum is not positive), phase-II minimizes
/// trace(X~) + mu (-log det LMI1 - log det(-LMI2)) by damped Newton over the
/// symmetric variables with mu driven 1 -> 1e-8 by factors of 10.
MinCostResult barrier_solve(const LmiProblem& prob, std::size_t n_agents);

double min_guaranteed_cost(const MinCostResult& res, std::size_t n_agents);

}  // namespace gcon
