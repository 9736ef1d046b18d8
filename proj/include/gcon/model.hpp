#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gcon/matrix.hpp"

namespace gcon {

/// The agent nonlinearity f together with its declared Lipschitz constant.
/// Config files can only carry the zero and sin_affine kinds; custom hooks
/// are a library-level facility with a caller-declared gamma.
struct NonlinearitySpec {
    enum class Kind { zero, sin_affine, custom };

    struct SinTerm {
        int row;    // output row, 1-based
        int arg;    // state index feeding sin(.), 1-based
        double coeff;
    };

    Kind kind = Kind::zero;
    std::vector<SinTerm> sin_terms;
    std::function<Vec(const Vec&)> custom_eval;
    double gamma = 0.0;

    static NonlinearitySpec zero();
    static NonlinearitySpec sin_affine(std::vector<SinTerm> terms, double gamma);
    static NonlinearitySpec custom(std::function<Vec(const Vec&)> eval, double gamma);
};

struct AgentModel {
    AgentModel(Matrix A, Matrix B, NonlinearitySpec f);

    Matrix A;
    Matrix B;
    NonlinearitySpec f;
    std::size_t d = 0;  // state dimension
    std::size_t p = 0;  // input dimension
};

/// Per-agent nonlinearity. Zero kind returns the zero vector.
Vec eval_f(const AgentModel& m, const Vec& x);

/// Stacked evaluation F(x) = [f(x_1)^T, ..., f(x_N)^T]^T.
Vec eval_F(const AgentModel& m, const Vec& x, std::size_t n_agents);

struct LipschitzReport {
    double max_ratio = 0.0;        // max ||f(y)-f(z)|| / ||y-z|| over samples
    double analytic_bound = -1.0;  // ||C||_2 for sin_affine, -1 when unavailable
    bool ok = false;
};

/// Samples pairs inside the given radius ball and reports the worst observed
/// difference ratio; for sin_affine the analytic bound ||C||_2 is computed as
/// well and the declared gamma must dominate it.
LipschitzReport validate_lipschitz(const AgentModel& m, int samples, double radius,
                                   std::uint64_t seed);

struct StabilizabilityReport {
    bool ok = false;
    std::optional<std::complex<double>> witness;  // failing eigenvalue
};

/// PBH test: every eigenvalue of A with Re >= -1e-10 must satisfy
/// rank [A - lambda I, B] = d; complex pairs go through the real 2d-augmented
/// form.
StabilizabilityReport check_stabilizable(const AgentModel& m);

}  // namespace gcon
