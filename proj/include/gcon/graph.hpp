#pragma once

#include <string>
#include <vector>

#include "gcon/matrix.hpp"

namespace gcon {

/// Weighted undirected graph on nodes 1..n. Edges are stored once and
/// interpreted symmetrically (w_ij = w_ji); self-loops and non-positive
/// weights are rejected at construction.
struct WeightedGraph {
    struct Edge {
        int i;
        int j;
        double w;
    };

    WeightedGraph(int n, std::vector<Edge> edges);

    int n = 0;
    std::vector<Edge> edges;
};

Matrix laplacian(const WeightedGraph& g);

/// Breadth-first search over positive-weight edges; exact, no tolerance.
bool is_connected(const WeightedGraph& g);

/// Ascending Laplacian eigenvalues. Throws DisconnectedError when the second
/// eigenvalue is not positive (<= 1e-9).
Vec spectrum(const WeightedGraph& g);

/// A finite switching family with the spectral bounds consumed by synthesis:
/// lambda_min is the smallest algebraic connectivity over the family,
/// lambda_max the largest Laplacian eigenvalue. Bounds and Laplacians are
/// computed eagerly and cached.
struct TopologySet {
    std::vector<WeightedGraph> graphs;
    std::vector<Matrix> laplacians;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    int n() const { return graphs.empty() ? 0 : graphs.front().n; }
    std::size_t size() const { return graphs.size(); }
};

/// Throws ValidationError (empty set / size mismatch) or DisconnectedError
/// naming the offending member.
TopologySet set_bounds(std::vector<WeightedGraph> graphs);

/// (1/n)(n I - 1 1^T): the orthogonal projector onto the disagreement
/// subspace; idempotent with eigenvalues {0, 1 x (n-1)}.
Matrix disagreement_projector(int n);

/// n x (n-1) matrix whose orthonormal columns span the complement of the
/// all-ones direction, built by Gram-Schmidt on {e_2 - e_1, ..., e_n - e_1}.
/// Satisfies U U^T = disagreement_projector(n).
Matrix orthonormal_complement(int n);

// JSON exchange format: {"n": int, "edges": [[i, j, w], ...]}, 1-based nodes.
WeightedGraph graph_from_json(const std::string& json_text);
std::string graph_to_json(const WeightedGraph& g);

}  // namespace gcon
