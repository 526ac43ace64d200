#pragma once

#include <vector>

#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

struct WeightedEdge {
    index_t neighbor;
    double weight;
};

/// Undirected weighted graph: adjacency lists are sorted by neighbor index,
/// symmetric, with no self-loops and strictly positive weights.
struct WeightedGraph {
    index_t num_nodes = 0;
    std::vector<std::vector<WeightedEdge>> adjacency;

    index_t degree(index_t v) const {
        return static_cast<index_t>(adjacency[v].size());
    }
    index_t num_edges() const;
};

/// Edge (i, j), i != j, exists iff a_ij != 0 or a_ji != 0, with weight
/// (|a_ij| + |a_ji|) / 2. Diagonal entries are ignored. One-sided entries
/// produce an edge so structurally unsymmetric couplings are kept.
WeightedGraph graph_from_matrix(const SparseMatrix& a);

} // namespace bjgmres
