#pragma once

#include <optional>
#include <string>

#include "gcon/matrix.hpp"
#include "gcon/model.hpp"

namespace gcon {

struct CostWeights {
    Matrix Q;  // d x d, symmetric positive definite
    Matrix R;  // p x p, symmetric positive definite
};

struct SpectralBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

enum class SynthesisMode { nonlinear_thm2, linear_thm3 };

std::string to_string(SynthesisMode mode);

/// The quadratic matrix equation A^T P + P A + P M P + NQ = 0, with
///   M  = lambda_max^2 B R B^T - 2 lambda_min B B^T (+ I_d in thm2 mode),
///   NQ = 3 lambda_max Q (+ gamma^2 I_d in thm2 mode).
struct RiccatiProblem {
    Matrix A;
    Matrix B;
    Matrix M;   // symmetric, possibly indefinite
    Matrix NQ;  // symmetric positive definite
    SynthesisMode mode = SynthesisMode::nonlinear_thm2;

    struct Provenance {
        double lambda_min;
        double lambda_max;
        double gamma;
        Matrix Q;
        Matrix R;
    };
    std::optional<Provenance> provenance;
};

struct SynthesisResult {
    Matrix P;         // symmetric positive definite solution
    Matrix K;         // B^T P
    double residual;  // ||A^T P + P A + P M P + NQ||_F at the solution
    SynthesisMode mode;
};

/// Assembles the Riccati data from model, cost weights and the topology
/// bounds. Throws BadCostMatrixError when Q or R fails symmetry or positive
/// definiteness.
RiccatiProblem build_riccati(const AgentModel& m, const CostWeights& cost,
                             const SpectralBounds& bounds, SynthesisMode mode);

/// Finds the stabilizing solution (A + M P Hurwitz, P > 0) by Newton-Kleinman
/// iteration with a 4-step homotopy that blends the indefinite part of M in,
/// falling back to a matrix-sign solve of the Hamiltonian when an iteration
/// stalls. Throws CareError with the last residual and the homotopy stage
/// reached when no stabilizing solution is found.
SynthesisResult solve_care(const RiccatiProblem& prob);

double riccati_residual(const RiccatiProblem& prob, const Matrix& p);

/// beta = (1/N) x0^T ((N I - 1 1^T) (x) P) x0, the guaranteed cost for the
/// given initial state. Zero exactly when all agent blocks coincide.
double guaranteed_cost(const SynthesisResult& res, const Vec& x0, std::size_t n_agents);
double guaranteed_cost(const Matrix& p, const Vec& x0, std::size_t n_agents);

struct Theorem3Report {
    bool condition_ok = false;
    double lambda_R_max = 0.0;
    double threshold = 0.0;  // 2 lambda_min / lambda_max^2
    bool stabilizable = false;
    bool m_negative_semidefinite = false;  // checked only when condition_ok
};

/// Linear-case sufficient condition lambda_R_max < 2 lambda_min lambda_max^-2
/// plus stabilizability. Requires f of zero kind (NonlinearModelError).
Theorem3Report theorem3_check(const AgentModel& m, const CostWeights& cost,
                              const SpectralBounds& bounds);

}  // namespace gcon
