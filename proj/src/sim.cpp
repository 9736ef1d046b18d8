#include "gcon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace gcon {

int SwitchingSignal::active(double t) const {
    int idx = segments.front().graph;
    for (const auto& seg : segments) {
        if (seg.t_start <= t) idx = seg.graph;
        else break;
    }
    return idx;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace

SwitchingSignal generate_signal(const SwitchingSpec& spec, const TopologySet& topo,
                                double t_end) {
    if (!(spec.dwell > 0.0)) throw ValidationError("switching: dwell must be > 0");
    if (!(t_end > 0.0)) throw ValidationError("switching: t_end must be > 0");
    const int ngraphs = static_cast<int>(topo.size());

    SwitchingSignal sig;
    sig.dwell = spec.dwell;

    if (spec.mode == SwitchingSpec::Mode::schedule) {
        if (spec.schedule.empty())
            throw ValidationError("switching: schedule is empty");
        if (spec.schedule.front().first != 0.0)
            throw ValidationError("switching: schedule must start at t = 0");
        double prev = -1.0;
        for (const auto& [t, idx] : spec.schedule) {
            if (idx < 1 || idx > ngraphs)
                throw ValidationError("switching: graph index " + std::to_string(idx) +
                                      " outside [1.." + std::to_string(ngraphs) + "]");
            if (prev >= 0.0) {
                const double gap = t - prev;
                if (gap <= 0.0)
                    throw ValidationError("switching: schedule times must increase");
                if (gap < spec.dwell - 1e-12)
                    throw DwellViolationError(
                        "switching: interval " + std::to_string(gap) +
                        " s violates dwell time " + std::to_string(spec.dwell) + " s");
            }
            prev = t;
            sig.segments.push_back({t, idx - 1});
        }
        return sig;
    }

    // Random mode: uniform graph draw, dwell uniform in [T_d, 2 T_d].
    std::mt19937_64 rng(spec.seed);
    double t = 0.0;
    while (t < t_end) {
        int idx = static_cast<int>(uniform(rng, 0.0, static_cast<double>(ngraphs)));
        idx = std::min(idx, ngraphs - 1);
        sig.segments.push_back({t, idx});
        t += uniform(rng, spec.dwell, 2.0 * spec.dwell);
    }
    return sig;
}

CostIntegrand cost_integrand(const Vec& x, const WeightedGraph& g, const Matrix& k_gain,
                             const Matrix& q, const Matrix& r, std::size_t d) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    if (x.size() != n * d) throw DimensionError("cost_integrand: state length != N*d");

    CostIntegrand out;
    // u_i = K sum_j w_ij (x_j - x_i); accumulate the coupling sums per agent.
    std::vector<Vec> coupling(n, Vec(d, 0.0));
    Vec diff(d);
    for (const auto& e : g.edges) {
        const std::size_t i = static_cast<std::size_t>(e.i - 1);
        const std::size_t j = static_cast<std::size_t>(e.j - 1);
        for (std::size_t k = 0; k < d; ++k) diff[k] = x[j * d + k] - x[i * d + k];
        for (std::size_t k = 0; k < d; ++k) {
            coupling[i][k] += e.w * diff[k];
            coupling[j][k] -= e.w * diff[k];
        }
        // Both ordered pairs contribute to the regulation term.
        out.jcx += 2.0 * e.w * dot(diff, mat_vec(q, diff));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec ui = mat_vec(k_gain, coupling[i]);
        out.jcu += dot(ui, mat_vec(r, ui));
    }
    return out;
}

namespace {

struct StepWorkspace {
    std::vector<Matrix> closed_loop;  // per graph: I (x) A - L (x) B K
    std::vector<Matrix> lap;          // per graph
    Matrix s_cost;                    // P B R B^T P (cross-check), when P given
    bool have_p = false;
};

void derivative(const AgentModel& m, const Matrix& biga, const Vec& x, std::size_t n,
                Vec& dx) {
    dx = mat_vec(biga, x);
    const Vec fx = eval_F(m, x, n);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += fx[i];
}

void reference_derivative(const AgentModel& m, const Vec& c, Vec& dc) {
    dc = mat_vec(m.A, c);
    const Vec fc = eval_f(m, c);
    for (std::size_t i = 0; i < dc.size(); ++i) dc[i] += fc[i];
}

// x^T (L^2 (x) S) x and x^T (2 L (x) Q) x via the blockwise coupling y = (L (x) I) x.
void quadratic_forms(const Vec& x, const Matrix& lap, const Matrix& s, const Matrix& q,
                     std::size_t n, std::size_t d, bool have_s, double& qf_u,
                     double& qf_x) {
    Vec y(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double lij = lap(i, j);
            if (lij == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) y[i * d + k] += lij * x[j * d + k];
        }
    qf_u = 0.0;
    qf_x = 0.0;
    Vec yi(d), xi(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            yi[k] = y[i * d + k];
            xi[k] = x[i * d + k];
        }
        if (have_s) qf_u += dot(yi, mat_vec(s, yi));
        qf_x += 2.0 * dot(xi, mat_vec(q, yi));
    }
}

double disagreement_norm(const Vec& x, std::size_t n, std::size_t d) {
    Vec mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) mean[k] += x[i * d + k];
    for (double& v : mean) v /= static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double dev = x[i * d + k] - mean[k];
            s += dev * dev;
        }
    return std::sqrt(s);
}

double lyapunov_value(const Vec& x, const Matrix& p, std::size_t n, std::size_t d) {
    Vec mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) mean[k] += x[i * d + k];
    for (double& v : mean) v /= static_cast<double>(n);
    double v = 0.0;
    Vec dev(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) dev[k] = x[i * d + k] - mean[k];
        v += dot(dev, mat_vec(p, dev));
    }
    return v;
}

bool state_ok(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > 1e12) return false;
    return true;
}

}  // namespace

Trajectory integrate(const AgentModel& m, const Matrix& k_gain, const TopologySet& topo,
                     const SwitchingSignal& sig, const Vec& x0, const Matrix& q,
                     const Matrix& r, const SimOptions& opts) {
    const std::size_t n = static_cast<std::size_t>(topo.n());
    const std::size_t d = m.d;
    if (x0.size() != n * d) throw DimensionError("integrate: x0 length != N*d");
    if (!(opts.h > 0.0) || !(opts.t_end > opts.h))
        throw ValidationError("integrate: need t_end > h > 0");
    if (k_gain.rows() != m.p || k_gain.cols() != d)
        throw DimensionError("integrate: gain must be p x d");
    for (double v : x0)
        if (!std::isfinite(v)) throw ValidationError("integrate: x0 not finite");

    StepWorkspace ws;
    const Matrix bk = m.B * k_gain;  // d x d
    const Matrix eye_n = Matrix::identity(n);
    for (std::size_t g = 0; g < topo.size(); ++g) {
        ws.lap.push_back(topo.laplacians[g]);
        ws.closed_loop.push_back(kron(eye_n, m.A) - kron(topo.laplacians[g], bk));
    }
    if (opts.P) {
        const Matrix pb = (*opts.P) * m.B;
        ws.s_cost = pb * r * transpose(pb);  // P B R B^T P
        ws.have_p = true;
    }

    const std::size_t nsteps = static_cast<std::size_t>(std::llround(opts.t_end / opts.h));

    // Switch instants snapped to the nearest grid index.
    std::vector<std::pair<std::size_t, int>> switch_steps;
    for (const auto& seg : sig.segments) {
        auto step = static_cast<std::size_t>(
            std::max<long long>(0, std::llround(seg.t_start / opts.h)));
        if (step > nsteps) continue;
        if (!switch_steps.empty() && switch_steps.back().first == step)
            switch_steps.back().second = seg.graph;
        else
            switch_steps.emplace_back(step, seg.graph);
    }
    if (switch_steps.empty() || switch_steps.front().first != 0)
        switch_steps.insert(switch_steps.begin(), {0, sig.segments.front().graph});

    Trajectory traj;
    traj.n_agents = n;
    traj.d = d;
    traj.has_lyapunov = ws.have_p;

    Vec x = x0;
    Vec c(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) c[k] += x0[i * d + k];
    for (double& v : c) v /= static_cast<double>(n);

    double jt = 0.0;
    std::size_t switch_ptr = 0;
    int active = switch_steps.front().second;

    auto record = [&](double t, const Vec& xs, const Vec& cs) {
        traj.times.push_back(t);
        traj.states.push_back(xs);
        traj.reference.push_back(cs);
        traj.disagreement.push_back(disagreement_norm(xs, n, d));
        traj.cost_running.push_back(jt);
        traj.lyapunov.push_back(ws.have_p ? lyapunov_value(xs, *opts.P, n, d) : 0.0);
    };

    auto integrand_checked = [&](const Vec& xs, int graph) {
        const CostIntegrand ci =
            cost_integrand(xs, topo.graphs[graph], k_gain, q, r, d);
        double qf_u = 0.0, qf_x = 0.0;
        quadratic_forms(xs, ws.lap[graph], ws.s_cost, q, n, d, ws.have_p, qf_u, qf_x);
        if (ws.have_p) {
            const double rel_u = std::abs(ci.jcu - qf_u) / (1.0 + std::abs(ci.jcu));
            traj.cost_crosscheck_max_rel = std::max(traj.cost_crosscheck_max_rel, rel_u);
        }
        const double rel_x = std::abs(ci.jcx - qf_x) / (1.0 + std::abs(ci.jcx));
        traj.cost_crosscheck_max_rel = std::max(traj.cost_crosscheck_max_rel, rel_x);
        return ci.jcu + ci.jcx;
    };

    record(0.0, x, c);
    double g_prev = integrand_checked(x, active);

    Vec k1, k2, k3, k4, xt(n * d);
    Vec c1, c2, c3, c4, ct(d);
    const double h = opts.h;

    for (std::size_t step = 0; step < nsteps; ++step) {
        while (switch_ptr + 1 < switch_steps.size() &&
               switch_steps[switch_ptr + 1].first <= step) {
            ++switch_ptr;
            active = switch_steps[switch_ptr].second;
            g_prev = integrand_checked(x, active);  // integrand restarts on the new graph
        }
        const Matrix& biga = ws.closed_loop[active];

        derivative(m, biga, x, n, k1);
        for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + 0.5 * h * k1[i];
        derivative(m, biga, xt, n, k2);
        for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + 0.5 * h * k2[i];
        derivative(m, biga, xt, n, k3);
        for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + h * k3[i];
        derivative(m, biga, xt, n, k4);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        reference_derivative(m, c, c1);
        for (std::size_t i = 0; i < d; ++i) ct[i] = c[i] + 0.5 * h * c1[i];
        reference_derivative(m, ct, c2);
        for (std::size_t i = 0; i < d; ++i) ct[i] = c[i] + 0.5 * h * c2[i];
        reference_derivative(m, ct, c3);
        for (std::size_t i = 0; i < d; ++i) ct[i] = c[i] + h * c3[i];
        reference_derivative(m, ct, c4);
        for (std::size_t i = 0; i < d; ++i)
            c[i] += h / 6.0 * (c1[i] + 2.0 * c2[i] + 2.0 * c3[i] + c4[i]);

        if (!state_ok(x)) {
            traj.nonfinite = true;
            break;
        }

        const double g_now = integrand_checked(x, active);
        jt += 0.5 * h * (g_prev + g_now);
        g_prev = g_now;
        record(static_cast<double>(step + 1) * h, x, c);
    }
    return traj;
}

ConvergenceReport convergence_report(const Trajectory& traj, double beta) {
    ConvergenceReport rep;
    if (traj.times.empty()) return rep;
    const double d0 = traj.disagreement.front();
    const double threshold = 1e-4 * (1.0 + d0);
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        if (traj.disagreement[k] <= threshold) {
            rep.consensus_time = traj.times[k];
            break;
        }
    rep.j_t_final = traj.cost_running.back();
    rep.bound_satisfied = !traj.nonfinite && rep.j_t_final <= beta;
    rep.v_monotone = traj.has_lyapunov;
    if (traj.has_lyapunov)
        for (std::size_t k = 0; k + 1 < traj.lyapunov.size(); ++k)
            if (traj.lyapunov[k + 1] >
                traj.lyapunov[k] + 1e-9 * (1.0 + traj.lyapunov[k])) {
                rep.v_monotone = false;
                break;
            }
    return rep;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");

    out << "t";
    for (std::size_t i = 1; i <= traj.n_agents; ++i)
        for (std::size_t k = 1; k <= traj.d; ++k)
            out << ",x_" << i << "_" << k;
    for (std::size_t k = 1; k <= traj.d; ++k) out << ",c_" << k;
    out << ",disagreement,J_T,V\n";

    char buf[32];
    auto put = [&](double v, char lead) {
        if (lead) out.put(lead);
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t row = 0; row < traj.times.size(); ++row) {
        put(traj.times[row], 0);
        for (double v : traj.states[row]) put(v, ',');
        for (double v : traj.reference[row]) put(v, ',');
        put(traj.disagreement[row], ',');
        put(traj.cost_running[row], ',');
        put(traj.lyapunov[row], ',');
        out.put('\n');
    }
}

}  // namespace gcon
