#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace gcon {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes do not match the operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A matrix required to be symmetric is not, beyond tolerance.
class NonSymmetricError : public Error {
public:
    using Error::Error;
};

// Iterative kernel hit its sweep/iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Pivot collapsed during elimination.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

// Lyapunov solve requires a Hurwitz coefficient matrix.
class NotHurwitzError : public Error {
public:
    NotHurwitzError(const std::string& msg, double max_real_part)
        : Error(msg), max_real_part(max_real_part) {}
    double max_real_part;
};

// Graph (or a member of a topology set) is not connected.
class DisconnectedError : public Error {
public:
    explicit DisconnectedError(const std::string& msg, int graph_index = -1)
        : Error(msg), graph_index(graph_index) {}
    int graph_index;  // 0-based index into the offending set, -1 if standalone
};

// Config or input data fails a structural check.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Cost weight Q or R is not symmetric positive definite.
class BadCostMatrixError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Malformed JSON input.
class ParseError : public Error {
public:
    using Error::Error;
};

// theorem3_check applied to a model with a nonzero nonlinearity.
class NonlinearModelError : public Error {
public:
    using Error::Error;
};

// PBH test failed; the workflow cannot synthesize a gain.
class NotStabilizableError : public Error {
public:
    NotStabilizableError(const std::string& msg, std::complex<double> witness)
        : Error(msg), witness(witness) {}
    std::complex<double> witness;
};

// Riccati solve failed; carries the diagnostics of the final iterate.
class CareError : public Error {
public:
    enum class Reason { no_stabilizing_solution, not_positive_definite };

    CareError(Reason reason, const std::string& msg, double last_residual,
              int homotopy_stage)
        : Error(msg),
          reason(reason),
          last_residual(last_residual),
          homotopy_stage(homotopy_stage) {}

    Reason reason;
    double last_residual;
    int homotopy_stage;  // homotopy stages completed before the failure
};

// LMI phase-I found no strictly feasible point.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& msg, double best_margin)
        : Error(msg), best_margin(best_margin) {}
    double best_margin;  // optimal phase-I slack (<= 0 certifies infeasibility)
};

}  // namespace gcon
