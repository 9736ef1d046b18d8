#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcon/graph.hpp"
#include "gcon/model.hpp"

namespace gcon {

// Hand-written schedule switches faster than the dwell time.
class DwellViolationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct SwitchingSpec {
    enum class Mode { schedule, random };
    Mode mode = Mode::schedule;
    double dwell = 0.5;  // T_d, seconds
    std::vector<std::pair<double, int>> schedule;  // (t_start, graph index 1-based)
    std::uint64_t seed = 0;  // random mode
};

/// Piecewise-constant, right-continuous switching signal with validated dwell
/// spacing. Graph indices are 0-based into the owning TopologySet.
struct SwitchingSignal {
    struct Segment {
        double t_start;
        int graph;  // 0-based
    };
    double dwell = 0.0;
    std::vector<Segment> segments;

    int active(double t) const;
};

/// Schedule mode validates the hand-written schedule (DwellViolationError on
/// spacing < T_d); random mode draws uniform graph indices with dwell uniform
/// in [T_d, 2T_d], reproducible by seed.
SwitchingSignal generate_signal(const SwitchingSpec& spec, const TopologySet& topo,
                                double t_end);

struct Trajectory {
    Vec times;
    std::vector<Vec> states;     // per step, stacked N*d
    std::vector<Vec> reference;  // per step, consensus reference c(t), length d
    Vec disagreement;            // || (I - 1 1^T / N) (x) I_d  x ||
    Vec cost_running;            // J_T accumulated by trapezoid
    Vec lyapunov;                // V(t) when P supplied, else zeros
    bool has_lyapunov = false;
    bool nonfinite = false;      // blow-up guard tripped; arrays truncated
    double cost_crosscheck_max_rel = 0.0;  // worst pairwise-vs-quadratic-form gap
    std::size_t n_agents = 0;
    std::size_t d = 0;
};

struct CostIntegrand {
    double jcu = 0.0;  // sum_i u_i^T R u_i
    double jcx = 0.0;  // sum_i sum_j w_ij (x_j - x_i)^T Q (x_j - x_i)
};

/// The two cost terms at one state under one topology, evaluated through the
/// pairwise sums (the defining form).
CostIntegrand cost_integrand(const Vec& x, const WeightedGraph& g, const Matrix& k_gain,
                             const Matrix& q, const Matrix& r, std::size_t d);

struct SimOptions {
    double t_end = 10.0;
    double h = 1e-3;
    const Matrix* P = nullptr;  // enables V(t) and the cost cross-check
};

/// Classical fixed-step RK4 on the stacked closed loop
///   x' = (I_N (x) A - L_sigma (x) B K) x + F(x),
/// with the consensus reference c' = A c + f(c) co-integrated from the
/// average initial state (never reads the switching signal). Switch instants
/// snap to the step grid. Blow-up (|entry| > 1e12) aborts with the partial
/// trajectory and the nonfinite flag set.
Trajectory integrate(const AgentModel& m, const Matrix& k_gain, const TopologySet& topo,
                     const SwitchingSignal& sig, const Vec& x0, const Matrix& q,
                     const Matrix& r, const SimOptions& opts);

struct ConvergenceReport {
    std::optional<double> consensus_time;
    double j_t_final = 0.0;
    bool bound_satisfied = false;
    bool v_monotone = false;
};

/// consensus_time: first t with disagreement <= 1e-4 (1 + initial);
/// bound_satisfied: J_T(final) <= beta; v_monotone: per-step decrease within
/// 1e-9 (1 + V).
ConvergenceReport convergence_report(const Trajectory& traj, double beta);

/// Writes the trajectory CSV: header t,x_1_1..x_N_d,c_1..c_d,disagreement,J_T,V
/// with 17-significant-digit formatting; byte-deterministic for fixed inputs.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace gcon
