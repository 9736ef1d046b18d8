#include "gcon/config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gcon/eig.hpp"

namespace gcon {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("config parse error in " + path + ": " + e.what());
    }
}

const json& field(const json& j, const char* name, const char* where) {
    if (!j.is_object() || !j.contains(name))
        throw ValidationError(std::string(where) + ": missing field \"" + name + "\"");
    return j.at(name);
}

Matrix matrix_field(const json& j, const char* name, const char* where) {
    const json& m = field(j, name, where);
    if (!m.is_array() || m.empty() || !m[0].is_array())
        throw ValidationError(std::string(where) + "." + name +
                              ": expected a nested array");
    const std::size_t rows = m.size();
    const std::size_t cols = m[0].size();
    Vec entries;
    entries.reserve(rows * cols);
    for (const auto& row : m) {
        if (!row.is_array() || row.size() != cols)
            throw ValidationError(std::string(where) + "." + name + ": ragged rows");
        for (const auto& v : row) {
            if (!v.is_number())
                throw ValidationError(std::string(where) + "." + name +
                                      ": non-numeric entry");
            entries.push_back(v.get<double>());
        }
    }
    try {
        return Matrix(rows, cols, std::move(entries));
    } catch (const Error& e) {
        throw ValidationError(std::string(where) + "." + name + ": " + e.what());
    }
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

NonlinearitySpec parse_nonlinearity(const json& model, double gamma) {
    const json& nl = field(model, "nonlinearity", "model");
    const std::string kind = field(nl, "kind", "model.nonlinearity").get<std::string>();
    if (kind == "zero") {
        if (gamma != 0.0)
            throw ValidationError("model.gamma: zero nonlinearity requires gamma = 0");
        return NonlinearitySpec::zero();
    }
    if (kind == "sin_affine") {
        std::vector<NonlinearitySpec::SinTerm> terms;
        for (const auto& t : field(nl, "terms", "model.nonlinearity")) {
            if (!t.is_array() || t.size() != 3)
                throw ValidationError("model.nonlinearity.terms: expected [row, arg, coeff]");
            terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
        }
        return NonlinearitySpec::sin_affine(std::move(terms), gamma);
    }
    throw ValidationError("model.nonlinearity.kind: unknown kind \"" + kind +
                          "\" (config files carry zero or sin_affine)");
}

RunConfig parse_config_json(const json& j) {
    const json& jm = field(j, "model", "config");
    const double gamma = field(jm, "gamma", "model").get<double>();
    Matrix a = matrix_field(jm, "A", "model");
    Matrix b = matrix_field(jm, "B", "model");
    AgentModel model(std::move(a), std::move(b), parse_nonlinearity(jm, gamma));

    const json& jc = field(j, "cost", "config");
    CostWeights cost{matrix_field(jc, "Q", "cost"), matrix_field(jc, "R", "cost")};
    if (cost.Q.rows() != model.d || cost.Q.cols() != model.d)
        throw ValidationError("cost.Q: must be d x d");
    if (cost.R.rows() != model.p || cost.R.cols() != model.p)
        throw ValidationError("cost.R: must be p x p");
    if (!is_symmetric(cost.Q) || !cholesky(symmetrize(cost.Q)).has_value())
        throw BadCostMatrixError("cost.Q: not symmetric positive definite");
    if (!is_symmetric(cost.R) || !cholesky(symmetrize(cost.R)).has_value())
        throw BadCostMatrixError("cost.R: not symmetric positive definite");

    const json& jt = field(j, "topologies", "config");
    if (!jt.is_array() || jt.empty())
        throw ValidationError("topologies: expected a nonempty array of graphs");
    std::vector<WeightedGraph> graphs;
    for (const auto& g : jt) graphs.push_back(graph_from_json(g.dump()));
    TopologySet topo = set_bounds(std::move(graphs));

    SwitchingSpec sw;
    const json& js = field(j, "switching", "config");
    const std::string mode = field(js, "mode", "switching").get<std::string>();
    sw.dwell = field(js, "dwell", "switching").get<double>();
    if (mode == "schedule") {
        sw.mode = SwitchingSpec::Mode::schedule;
        for (const auto& seg : field(js, "schedule", "switching")) {
            if (!seg.is_array() || seg.size() != 2)
                throw ValidationError("switching.schedule: expected [t, graph-index]");
            sw.schedule.emplace_back(seg[0].get<double>(), seg[1].get<int>());
        }
    } else if (mode == "random") {
        sw.mode = SwitchingSpec::Mode::random;
    } else {
        throw ValidationError("switching.mode: expected \"schedule\" or \"random\"");
    }

    RunFlags flags;
    if (j.contains("flags")) {
        const json& jf = j.at("flags");
        if (jf.contains("mode")) {
            const std::string m = jf.at("mode").get<std::string>();
            if (m == "thm2") flags.mode = SynthesisMode::nonlinear_thm2;
            else if (m == "thm3") flags.mode = SynthesisMode::linear_thm3;
            else throw ValidationError("flags.mode: expected \"thm2\" or \"thm3\"");
        }
        if (jf.contains("paper_literal_lmi"))
            flags.paper_literal_lmi = jf.at("paper_literal_lmi").get<bool>();
        if (jf.contains("seed")) flags.seed = jf.at("seed").get<std::uint64_t>();
    }
    sw.seed = js.contains("seed") ? js.at("seed").get<std::uint64_t>() : flags.seed;

    SimParams sim;
    const json& jsim = field(j, "sim", "config");
    sim.t_end = field(jsim, "t_end", "sim").get<double>();
    sim.dt = field(jsim, "dt", "sim").get<double>();
    if (!(sim.dt > 0.0)) throw ValidationError("sim.dt: must be > 0");
    if (!(sim.t_end > sim.dt)) throw ValidationError("sim.t_end: must exceed sim.dt");
    const Matrix x0 = matrix_field(jsim, "x0", "sim");
    if (x0.rows() != static_cast<std::size_t>(topo.n()))
        throw ValidationError("sim.x0: row count " + std::to_string(x0.rows()) +
                              " does not match the " + std::to_string(topo.n()) +
                              "-node topologies");
    if (x0.cols() != model.d)
        throw ValidationError("sim.x0: column count does not match the state dimension");
    sim.x0 = x0.data();

    if (flags.mode == SynthesisMode::linear_thm3 &&
        model.f.kind != NonlinearitySpec::Kind::zero)
        throw ValidationError("flags.mode: thm3 requires the zero nonlinearity");

    return RunConfig{std::move(model), std::move(cost), std::move(topo),
                     std::move(sw),    std::move(sim),  flags};
}

}  // namespace

RunConfig parse_config(const std::string& path) {
    return parse_config_json(load_json_file(path));
}

RunConfig parse_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    return parse_config_json(j);
}

// ---- Workflows -------------------------------------------------------------

SynthesisOutput run_synthesize(const RunConfig& cfg) {
    const StabilizabilityReport stab = check_stabilizable(cfg.model);
    if (!stab.ok) {
        std::ostringstream msg;
        msg << "model is not stabilizable (witness eigenvalue "
            << stab.witness->real() << (stab.witness->imag() >= 0 ? "+" : "")
            << stab.witness->imag() << "i)";
        throw NotStabilizableError(msg.str(), *stab.witness);
    }

    SynthesisOutput out;
    out.bounds = {cfg.topo.lambda_min, cfg.topo.lambda_max};
    if (cfg.flags.mode == SynthesisMode::linear_thm3)
        out.thm3 = theorem3_check(cfg.model, cfg.cost, out.bounds);

    const RiccatiProblem prob =
        build_riccati(cfg.model, cfg.cost, out.bounds, cfg.flags.mode);
    try {
        out.result = solve_care(prob);
    } catch (const CareError& e) {
        if (out.thm3 && !out.thm3->condition_ok) {
            std::ostringstream msg;
            msg << e.what() << " [linear-case condition fails: lambda_R_max = "
                << out.thm3->lambda_R_max << " >= threshold " << out.thm3->threshold
                << "]";
            throw CareError(e.reason, msg.str(), e.last_residual, e.homotopy_stage);
        }
        throw;
    }
    out.beta = guaranteed_cost(out.result, cfg.sim.x0, cfg.n_agents());
    return out;
}

SimulateOutput run_simulate(const RunConfig& cfg, const GainInput& gain) {
    SimulateOutput out;
    const SwitchingSignal sig = generate_signal(cfg.switching, cfg.topo, cfg.sim.t_end);
    SimOptions opts;
    opts.t_end = cfg.sim.t_end;
    opts.h = cfg.sim.dt;
    opts.P = gain.P ? &*gain.P : nullptr;
    out.traj = integrate(cfg.model, gain.K, cfg.topo, sig, cfg.sim.x0, cfg.cost.Q,
                         cfg.cost.R, opts);
    if (gain.beta) out.beta = gain.beta;
    else if (gain.P) out.beta = guaranteed_cost(*gain.P, cfg.sim.x0, cfg.n_agents());
    out.report = convergence_report(out.traj, out.beta.value_or(
                                                  std::numeric_limits<double>::infinity()));
    if (!out.beta) out.report.bound_satisfied = false;
    return out;
}

MinCostOutput run_mincost(const RunConfig& cfg) {
    MinCostOutput out;
    const SpectralBounds bounds{cfg.topo.lambda_min, cfg.topo.lambda_max};
    const LmiProblem prob =
        make_lmi_problem(cfg.model, cfg.cost, bounds, cfg.flags.paper_literal_lmi);
    out.res = barrier_solve(prob, cfg.n_agents());
    try {
        const SynthesisResult care =
            solve_care(build_riccati(cfg.model, cfg.cost, bounds, cfg.flags.mode));
        out.care_trace_cost = 0.5 * static_cast<double>(cfg.n_agents()) * trace(care.P);
    } catch (const Error&) {
        // Comparison column only; the Riccati route may be unsolvable.
    }
    return out;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

PropertyResult projector_identity_property(const RunConfig& cfg) {
    PropertyResult p{"projector_identity", true, ""};
    const int n = cfg.topo.n();
    const Matrix u = orthonormal_complement(n);
    const Matrix pi = disagreement_projector(n);
    const double e1 = frobenius_norm(u * transpose(u) - pi);
    const double e2 = frobenius_norm(transpose(u) * u - Matrix::identity(n - 1));
    const double e3 = frobenius_norm(pi * pi - pi);
    p.pass = e1 <= 1e-10 && e2 <= 1e-12 && e3 <= 1e-12;
    std::ostringstream d;
    d << "||UU^T - Pi|| = " << e1 << ", ||U^T U - I|| = " << e2
      << ", ||Pi^2 - Pi|| = " << e3;
    p.detail = d.str();
    return p;
}

PropertyResult beta_pairwise_property(const RunConfig& cfg) {
    PropertyResult p{"beta_pairwise_identity", true, ""};
    std::mt19937_64 rng(cfg.flags.seed ^ 0x9e3779b97f4a7c15ull);
    const std::size_t d = cfg.model.d;
    const std::size_t n = cfg.n_agents();
    double worst = 0.0;
    for (int trial = 0; trial < 32; ++trial) {
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) g(i, j) = uniform(rng, -1.0, 1.0);
        const Matrix pmat = symmetrize(g * transpose(g) + 0.1 * Matrix::identity(d));
        Vec x(n * d);
        for (double& v : x) v = uniform(rng, -2.0, 2.0);
        const double beta = guaranteed_cost(pmat, x, n);
        double pairwise = 0.0;
        Vec diff(d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < d; ++k)
                    diff[k] = x[j * d + k] - x[i * d + k];
                pairwise += dot(diff, mat_vec(pmat, diff));
            }
        pairwise /= 2.0 * static_cast<double>(n);
        worst = std::max(worst, std::abs(beta - pairwise) / (1.0 + std::abs(pairwise)));
    }
    p.pass = worst <= 1e-9;
    p.detail = "max relative gap " + std::to_string(worst);
    return p;
}

PropertyResult congruence_property(const RunConfig& cfg, bool literal) {
    PropertyResult p{literal ? "congruence_identity_literal"
                             : "congruence_identity_corrected",
                     true, ""};
    const SpectralBounds bounds{cfg.topo.lambda_min, cfg.topo.lambda_max};
    const LmiProblem prob = make_lmi_problem(cfg.model, cfg.cost, bounds, literal);
    const RiccatiProblem care =
        build_riccati(cfg.model, cfg.cost, bounds, SynthesisMode::nonlinear_thm2);

    std::mt19937_64 rng(cfg.flags.seed ^ 0xda3e39cb94b95bdbull);
    const std::size_t d = cfg.model.d;
    double worst = 0.0;
    for (int trial = 0; trial < 16; ++trial) {
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) g(i, j) = uniform(rng, -1.0, 1.0);
        const Matrix pt = symmetrize(g * transpose(g) + 0.2 * Matrix::identity(d));
        const Matrix lhs = schur_reduced_lmi2(prob, pt);
        const Matrix pinv = inverse(pt);
        const Matrix xi = transpose(care.A) * pinv + pinv * care.A +
                          pinv * care.M * pinv + care.NQ;
        const Matrix rhs = pt * xi * pt;
        worst = std::max(worst,
                         frobenius_norm(lhs - rhs) / (1.0 + frobenius_norm(rhs)));
    }
    if (!literal) {
        p.pass = worst <= 1e-8;
        p.detail = "max relative gap " + std::to_string(worst);
    } else {
        // The printed sign flips the B R B^T term; the identity must break by
        // exactly that much unless the term vanishes.
        const Matrix brbt = prob.B * prob.R * transpose(prob.B);
        const double term = prob.lambda_max * prob.lambda_max * frobenius_norm(brbt);
        p.pass = (term == 0.0) ? worst <= 1e-8 : worst > 1e-8;
        p.detail = "max relative gap " + std::to_string(worst) +
                   " (printed-sign convention, expected to differ)";
    }
    return p;
}

}  // namespace

VerifyOutput run_verify(const RunConfig& cfg) {
    VerifyOutput out;
    out.properties.push_back(projector_identity_property(cfg));
    out.properties.push_back(beta_pairwise_property(cfg));
    out.properties.push_back(congruence_property(cfg, false));
    out.properties.push_back(congruence_property(cfg, true));

    // Run-level properties need a synthesized gain.
    std::optional<SynthesisOutput> synth;
    std::string synth_fail;
    try {
        synth = run_synthesize(cfg);
    } catch (const Error& e) {
        synth_fail = e.what();
    }

    if (!synth) {
        for (const char* name : {"cost_form_equivalence", "consensus_function_invariance",
                                 "lyapunov_monotone", "cost_running_monotone"})
            out.properties.push_back({name, false, "synthesis unavailable: " + synth_fail});
    } else {
        GainInput gain{synth->result.K, synth->result.P, synth->beta};
        RunConfig run_cfg = cfg;
        run_cfg.sim.t_end = std::min(cfg.sim.t_end, 5.0);
        const SimulateOutput sim = run_simulate(run_cfg, gain);

        {
            PropertyResult p{"cost_form_equivalence", true, ""};
            p.pass = !sim.traj.nonfinite && sim.traj.cost_crosscheck_max_rel <= 1e-8;
            p.detail = "max relative gap " +
                       std::to_string(sim.traj.cost_crosscheck_max_rel);
            out.properties.push_back(p);
        }
        {
            PropertyResult p{"consensus_function_invariance", true, ""};
            RunConfig alt = run_cfg;
            alt.switching.mode = SwitchingSpec::Mode::random;
            alt.switching.seed = cfg.switching.seed + 1;
            const SimulateOutput sim2 = run_simulate(alt, gain);
            bool identical = sim.traj.reference.size() == sim2.traj.reference.size();
            if (identical)
                for (std::size_t k = 0; k < sim.traj.reference.size() && identical; ++k)
                    identical = std::memcmp(sim.traj.reference[k].data(),
                                            sim2.traj.reference[k].data(),
                                            sim.traj.reference[k].size() *
                                                sizeof(double)) == 0;
            p.pass = identical;
            p.detail = identical ? "c(t) grids bit-identical across switching signals"
                                 : "c(t) grids differ";
            out.properties.push_back(p);
        }
        {
            PropertyResult p{"lyapunov_monotone", true, ""};
            p.pass = sim.report.v_monotone && !sim.traj.nonfinite;
            p.detail = p.pass ? "V nonincreasing within per-step tolerance"
                              : "V increased beyond tolerance";
            out.properties.push_back(p);
        }
        {
            PropertyResult p{"cost_running_monotone", true, ""};
            for (std::size_t k = 0; k + 1 < sim.traj.cost_running.size(); ++k)
                if (sim.traj.cost_running[k + 1] < sim.traj.cost_running[k] - 1e-15) {
                    p.pass = false;
                    break;
                }
            p.detail = p.pass ? "J_T nondecreasing" : "J_T decreased";
            out.properties.push_back(p);
        }
    }

    out.all_pass = true;
    for (const auto& p : out.properties) out.all_pass = out.all_pass && p.pass;
    return out;
}

// ---- JSON artifacts --------------------------------------------------------

std::string synthesis_to_json(const SynthesisOutput& out) {
    json j;
    j["P"] = matrix_to_json(out.result.P);
    j["K"] = matrix_to_json(out.result.K);
    j["beta"] = out.beta;
    j["residual"] = out.result.residual;
    j["mode"] = to_string(out.result.mode);
    return j.dump(2) + "\n";
}

std::string mincost_to_json(const MinCostOutput& out, bool paper_literal_lmi) {
    json j;
    j["P_tilde"] = matrix_to_json(out.res.P_tilde);
    j["X_tilde"] = matrix_to_json(out.res.X_tilde);
    j["K"] = matrix_to_json(out.res.K);
    j["beta_star"] = out.res.beta_star;
    j["margins"] = {out.res.margin_lmi1, out.res.margin_lmi2};
    j["paper_literal_lmi"] = paper_literal_lmi;
    j["mu_final"] = out.res.mu_final;
    j["gap_estimate"] = out.res.gap_estimate;
    j["stalled"] = out.res.stalled;
    if (out.care_trace_cost) j["care_trace_cost"] = *out.care_trace_cost;
    return j.dump(2) + "\n";
}

std::string verify_to_json(const VerifyOutput& out) {
    json j;
    j["all_pass"] = out.all_pass;
    json props = json::array();
    for (const auto& p : out.properties)
        props.push_back({{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}});
    j["properties"] = std::move(props);
    return j.dump(2) + "\n";
}

std::string summary_to_json(const RunConfig& cfg, const SynthesisOutput* synth,
                            const MinCostOutput* mincost, const SimulateOutput* sim) {
    json j;
    j["lambda_min"] = cfg.topo.lambda_min;
    j["lambda_max"] = cfg.topo.lambda_max;
    j["n_agents"] = cfg.topo.n();
    if (synth) {
        j["K"] = matrix_to_json(synth->result.K);
        j["beta"] = synth->beta;
        j["residual"] = synth->result.residual;
        j["mode"] = to_string(synth->result.mode);
        if (synth->thm3) {
            j["thm3_condition_ok"] = synth->thm3->condition_ok;
            j["thm3_lambda_R_max"] = synth->thm3->lambda_R_max;
            j["thm3_threshold"] = synth->thm3->threshold;
        }
    }
    if (mincost) {
        j["K"] = matrix_to_json(mincost->res.K);
        j["beta_star"] = mincost->res.beta_star;
        j["margins"] = {mincost->res.margin_lmi1, mincost->res.margin_lmi2};
        if (mincost->care_trace_cost) j["care_trace_cost"] = *mincost->care_trace_cost;
    }
    if (sim) {
        if (sim->report.consensus_time)
            j["consensus_time"] = *sim->report.consensus_time;
        else
            j["consensus_time"] = nullptr;
        j["J_T_final"] = sim->report.j_t_final;
        j["bound_satisfied"] = sim->report.bound_satisfied;
        j["v_monotone"] = sim->report.v_monotone;
        j["nonfinite"] = sim->traj.nonfinite;
        if (sim->beta) j["beta"] = *sim->beta;
    }
    return j.dump(2) + "\n";
}

GainInput load_gain_json(const std::string& path) {
    const json j = load_json_file(path);
    GainInput g;
    g.K = matrix_field(j, "K", "gain");
    if (j.contains("P")) g.P = matrix_field(j, "P", "gain");
    if (j.contains("beta")) g.beta = j.at("beta").get<double>();
    return g;
}

}  // namespace gcon
