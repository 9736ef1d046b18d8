#include "gcon/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gcon/eig.hpp"

namespace gcon {

NonlinearitySpec NonlinearitySpec::zero() { return NonlinearitySpec{}; }

NonlinearitySpec NonlinearitySpec::sin_affine(std::vector<SinTerm> terms, double gamma) {
    NonlinearitySpec s;
    s.kind = Kind::sin_affine;
    s.sin_terms = std::move(terms);
    s.gamma = gamma;
    return s;
}

NonlinearitySpec NonlinearitySpec::custom(std::function<Vec(const Vec&)> eval,
                                          double gamma) {
    NonlinearitySpec s;
    s.kind = Kind::custom;
    s.custom_eval = std::move(eval);
    s.gamma = gamma;
    return s;
}

AgentModel::AgentModel(Matrix A_, Matrix B_, NonlinearitySpec f_)
    : A(std::move(A_)), B(std::move(B_)), f(std::move(f_)) {
    if (A.rows() != A.cols()) throw DimensionError("model: A must be square");
    if (B.rows() != A.rows()) throw DimensionError("model: B row count must match A");
    if (B.cols() < 1) throw DimensionError("model: B needs at least one column");
    d = A.rows();
    p = B.cols();

    if (f.kind == NonlinearitySpec::Kind::zero) {
        if (f.gamma != 0.0)
            throw ValidationError("model: zero nonlinearity requires gamma = 0");
    } else {
        if (!(f.gamma > 0.0))
            throw ValidationError("model: nonzero nonlinearity requires gamma > 0");
    }
    for (const auto& t : f.sin_terms) {
        if (t.row < 1 || t.row > static_cast<int>(d))
            throw ValidationError("model: sin term row out of range");
        if (t.arg < 1 || t.arg > static_cast<int>(d))
            throw ValidationError("model: sin term argument index out of range");
        if (!std::isfinite(t.coeff))
            throw ValidationError("model: sin term coefficient not finite");
    }
    if (f.kind == NonlinearitySpec::Kind::custom && !f.custom_eval)
        throw ValidationError("model: custom nonlinearity needs an evaluation hook");
}

Vec eval_f(const AgentModel& m, const Vec& x) {
    if (x.size() != m.d)
        throw DimensionError("eval_f: state length " + std::to_string(x.size()) +
                             " != d = " + std::to_string(m.d));
    switch (m.f.kind) {
        case NonlinearitySpec::Kind::zero:
            return Vec(m.d, 0.0);
        case NonlinearitySpec::Kind::sin_affine: {
            Vec out(m.d, 0.0);
            for (const auto& t : m.f.sin_terms)
                out[t.row - 1] += t.coeff * std::sin(x[t.arg - 1]);
            return out;
        }
        case NonlinearitySpec::Kind::custom: {
            Vec out = m.f.custom_eval(x);
            if (out.size() != m.d)
                throw DimensionError("eval_f: custom hook returned wrong length");
            return out;
        }
    }
    return Vec(m.d, 0.0);
}

Vec eval_F(const AgentModel& m, const Vec& x, std::size_t n_agents) {
    if (x.size() != n_agents * m.d)
        throw DimensionError("eval_F: stacked state length mismatch");
    Vec out(x.size(), 0.0);
    Vec xi(m.d);
    for (std::size_t a = 0; a < n_agents; ++a) {
        for (std::size_t k = 0; k < m.d; ++k) xi[k] = x[a * m.d + k];
        const Vec fi = eval_f(m, xi);
        for (std::size_t k = 0; k < m.d; ++k) out[a * m.d + k] = fi[k];
    }
    return out;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

// Spectral norm of the sin_affine coefficient matrix C (C[r][k] summed over
// duplicate terms); the Lipschitz constant of x -> C sin(x) elementwise.
double sin_affine_bound(const AgentModel& m) {
    Matrix c(m.d, m.d);
    for (const auto& t : m.f.sin_terms) c(t.row - 1, t.arg - 1) += t.coeff;
    const Matrix gram = transpose(c) * c;
    const Vec eigs = sym_eig(symmetrize(gram)).eigenvalues;
    return std::sqrt(std::max(0.0, eigs.back()));
}

}  // namespace

LipschitzReport validate_lipschitz(const AgentModel& m, int samples, double radius,
                                   std::uint64_t seed) {
    if (samples < 1) throw ValidationError("validate_lipschitz: samples must be >= 1");
    LipschitzReport rep;
    std::mt19937_64 rng(seed);
    Vec y(m.d), z(m.d);
    for (int s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < m.d; ++k) {
            y[k] = uniform(rng, -radius, radius);
            z[k] = uniform(rng, -radius, radius);
        }
        Vec dyz(m.d);
        for (std::size_t k = 0; k < m.d; ++k) dyz[k] = y[k] - z[k];
        const double dn = norm2(dyz);
        if (dn == 0.0) continue;
        const Vec fy = eval_f(m, y);
        const Vec fz = eval_f(m, z);
        Vec df(m.d);
        for (std::size_t k = 0; k < m.d; ++k) df[k] = fy[k] - fz[k];
        rep.max_ratio = std::max(rep.max_ratio, norm2(df) / dn);
    }
    rep.ok = rep.max_ratio <= m.f.gamma * (1.0 + 1e-9);
    if (m.f.kind == NonlinearitySpec::Kind::sin_affine) {
        rep.analytic_bound = sin_affine_bound(m);
        rep.ok = rep.ok && m.f.gamma >= rep.analytic_bound * (1.0 - 1e-12);
    }
    if (m.f.kind == NonlinearitySpec::Kind::zero) rep.ok = true;
    return rep;
}

StabilizabilityReport check_stabilizable(const AgentModel& m) {
    const std::size_t d = m.d, p = m.p;
    StabilizabilityReport rep;
    rep.ok = true;
    const double real_cut = 1e-9;

    for (const auto& lambda : eig_values(m.A)) {
        if (lambda.real() < -1e-10) continue;       // strictly stable mode
        if (lambda.imag() < -real_cut) continue;    // conjugate handled once
        const bool is_real = std::abs(lambda.imag()) <= real_cut * (1.0 + std::abs(lambda));

        bool full_rank;
        if (is_real) {
            Matrix pbh(d, d + p);
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j)
                    pbh(i, j) = m.A(i, j) - (i == j ? lambda.real() : 0.0);
                for (std::size_t j = 0; j < p; ++j) pbh(i, d + j) = m.B(i, j);
            }
            full_rank = rank_of(pbh) == d;
        } else {
            // Real 2d-augmented form of [A - (alpha + i beta) I, B].
            const double alpha = lambda.real();
            const double beta = lambda.imag();
            Matrix pbh(2 * d, 2 * (d + p));
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double aij = m.A(i, j) - (i == j ? alpha : 0.0);
                    pbh(i, j) = aij;
                    pbh(d + i, d + j) = aij;
                }
                pbh(i, d + i) = beta;
                pbh(d + i, i) = -beta;
                for (std::size_t j = 0; j < p; ++j) {
                    pbh(i, 2 * d + j) = m.B(i, j);
                    pbh(d + i, 2 * d + p + j) = m.B(i, j);
                }
            }
            full_rank = rank_of(pbh) == 2 * d;
        }
        if (!full_rank) {
            rep.ok = false;
            rep.witness = lambda;
            return rep;
        }
    }
    return rep;
}

}  // namespace gcon
