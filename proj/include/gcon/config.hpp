#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcon/graph.hpp"
#include "gcon/mincost.hpp"
#include "gcon/model.hpp"
#include "gcon/sim.hpp"
#include "gcon/synthesis.hpp"

namespace gcon {

struct SimParams {
    double t_end = 10.0;
    double dt = 1e-3;
    Vec x0;  // stacked N*d, agent-major
};

struct RunFlags {
    SynthesisMode mode = SynthesisMode::nonlinear_thm2;
    bool paper_literal_lmi = false;
    std::uint64_t seed = 42;
};

/// A fully validated run description: model, cost weights, the switching
/// topology family (bounds cached), signal spec, integration window and
/// initial states. All cross-dimension checks happen at parse time.
struct RunConfig {
    AgentModel model;
    CostWeights cost;
    TopologySet topo;
    SwitchingSpec switching;
    SimParams sim;
    RunFlags flags;

    std::size_t n_agents() const { return static_cast<std::size_t>(topo.n()); }
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

// ---- Workflows -----------------------------------------------------------

struct SynthesisOutput {
    SpectralBounds bounds;
    SynthesisResult result;
    double beta = 0.0;  // guaranteed cost at the config's x0
    std::optional<Theorem3Report> thm3;
};

/// check_stabilizable -> set_bounds -> build_riccati -> solve_care ->
/// guaranteed_cost. Throws NotStabilizableError / CareError / config errors.
SynthesisOutput run_synthesize(const RunConfig& cfg);

struct GainInput {
    Matrix K;
    std::optional<Matrix> P;
    std::optional<double> beta;
};

struct SimulateOutput {
    Trajectory traj;
    ConvergenceReport report;
    std::optional<double> beta;
};

SimulateOutput run_simulate(const RunConfig& cfg, const GainInput& gain);

struct MinCostOutput {
    MinCostResult res;
    // 0.5 N trace(P) of the Riccati solution, when that route also solves.
    std::optional<double> care_trace_cost;
};

MinCostOutput run_mincost(const RunConfig& cfg);

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOutput {
    std::vector<PropertyResult> properties;
    bool all_pass = false;
};

/// Invariant suite on the config: projector/decomposition identities, cost
/// pairwise-vs-quadratic-form checks, consensus-function invariance across
/// switching signals, Lyapunov monotonicity, and the LMI congruence identity
/// under both sign conventions.
VerifyOutput run_verify(const RunConfig& cfg);

// ---- JSON artifacts (deterministic for fixed inputs) ----------------------

std::string synthesis_to_json(const SynthesisOutput& out);
std::string mincost_to_json(const MinCostOutput& out, bool paper_literal_lmi);
std::string verify_to_json(const VerifyOutput& out);

/// ReportSummary: bounds, gain, cost numbers and run outcomes; fields not
/// applicable to the command at hand are omitted.
std::string summary_to_json(const RunConfig& cfg, const SynthesisOutput* synth,
                            const MinCostOutput* mincost, const SimulateOutput* sim);

/// Reads a gain file: either a synthesis artifact ({"K", "P", "beta", ...})
/// or a bare {"K": [[...]]}.
GainInput load_gain_json(const std::string& path);

}  // namespace gcon
