#include "gcon/graph.hpp"

#include <cmath>
#include <deque>
#include <string>

#include <json.hpp>

#include "gcon/eig.hpp"

namespace gcon {

WeightedGraph::WeightedGraph(int n_, std::vector<Edge> edges_)
    : n(n_), edges(std::move(edges_)) {
    if (n < 1) throw ValidationError("graph: node count must be >= 1");
    for (const Edge& e : edges) {
        if (e.i < 1 || e.i > n || e.j < 1 || e.j > n)
            throw ValidationError("graph: edge endpoint outside [1.." +
                                  std::to_string(n) + "]");
        if (e.i == e.j) throw ValidationError("graph: self-loop not allowed");
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw ValidationError("graph: edge weight must be positive and finite");
    }
}

Matrix laplacian(const WeightedGraph& g) {
    Matrix l(g.n, g.n);
    for (const auto& e : g.edges) {
        const std::size_t i = static_cast<std::size_t>(e.i - 1);
        const std::size_t j = static_cast<std::size_t>(e.j - 1);
        l(i, j) -= e.w;
        l(j, i) -= e.w;
        l(i, i) += e.w;
        l(j, j) += e.w;
    }
    return l;
}

bool is_connected(const WeightedGraph& g) {
    if (g.n == 1) return true;
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& e : g.edges) {
        adj[e.i - 1].push_back(e.j - 1);
        adj[e.j - 1].push_back(e.i - 1);
    }
    std::vector<char> seen(g.n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                queue.push_back(v);
            }
    }
    return count == g.n;
}

Vec spectrum(const WeightedGraph& g) {
    const Vec eigs = sym_eig(laplacian(g)).eigenvalues;
    if (g.n >= 2 && eigs[1] <= 1e-9)
        throw DisconnectedError("spectrum: graph is disconnected (lambda_2 = " +
                                std::to_string(eigs[1]) + ")");
    return eigs;
}

TopologySet set_bounds(std::vector<WeightedGraph> graphs) {
    if (graphs.empty()) throw ValidationError("topology set: empty");
    const int n = graphs.front().n;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        if (graphs[k].n != n)
            throw ValidationError("topology set: graph " + std::to_string(k + 1) +
                                  " has mismatched node count");
        if (!is_connected(graphs[k]))
            throw DisconnectedError("topology set: graph " + std::to_string(k + 1) +
                                        " is disconnected",
                                    static_cast<int>(k));
    }

    TopologySet set;
    set.graphs = std::move(graphs);
    set.lambda_min = 0.0;
    set.lambda_max = 0.0;
    bool first = true;
    for (const auto& g : set.graphs) {
        set.laplacians.push_back(laplacian(g));
        const Vec eigs = spectrum(g);
        const double l2 = (g.n >= 2) ? eigs[1] : 0.0;
        const double ln = eigs.back();
        if (first) {
            set.lambda_min = l2;
            set.lambda_max = ln;
            first = false;
        } else {
            set.lambda_min = std::min(set.lambda_min, l2);
            set.lambda_max = std::max(set.lambda_max, ln);
        }
    }
    return set;
}

Matrix disagreement_projector(int n) {
    if (n < 2) throw ValidationError("disagreement_projector: n must be >= 2");
    Matrix p(n, n);
    const double off = -1.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = (i == j) ? 1.0 + off : off;
    return p;
}

Matrix orthonormal_complement(int n) {
    if (n < 2) throw ValidationError("orthonormal_complement: n must be >= 2");
    const std::size_t un = static_cast<std::size_t>(n);
    Matrix u(un, un - 1);
    std::vector<Vec> cols;
    for (std::size_t k = 1; k < un; ++k) {
        Vec v(un, 0.0);
        v[0] = -1.0;
        v[k] = 1.0;
        // Two Gram-Schmidt passes; the basis vectors are far from orthogonal.
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : cols) {
                const double proj = dot(v, q);
                for (std::size_t i = 0; i < un; ++i) v[i] -= proj * q[i];
            }
        const double nv = norm2(v);
        for (double& x : v) x /= nv;
        cols.push_back(v);
    }
    for (std::size_t j = 0; j + 1 < un; ++j)
        for (std::size_t i = 0; i < un; ++i) u(i, j) = cols[j][i];
    return u;
}

WeightedGraph graph_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("graph json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
        throw ValidationError("graph json: expected {\"n\": int, \"edges\": [[i,j,w],...]}");
    const int n = j.at("n").get<int>();
    std::vector<WeightedGraph::Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3)
            throw ValidationError("graph json: edge must be [i, j, w]");
        edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    return WeightedGraph(n, std::move(edges));
}

std::string graph_to_json(const WeightedGraph& g) {
    nlohmann::json j;
    j["n"] = g.n;
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges) edges.push_back({e.i, e.j, e.w});
    return j.dump();
}

}  // namespace gcon
