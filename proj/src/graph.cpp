#include "bjgmres/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace bjgmres {

index_t WeightedGraph::num_edges() const {
    index_t twice = 0;
    for (const auto& adj : adjacency) twice += static_cast<index_t>(adj.size());
    return twice / 2;
}

WeightedGraph graph_from_matrix(const SparseMatrix& a) {
    const index_t n = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("graph_from_matrix: matrix must be square");

    // Accumulate |a_ij| + |a_ji| per unordered pair.
    std::map<std::pair<index_t, index_t>, double> pair_sum;
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (index_t i = 0; i < n; ++i) {
        for (index_t k = starts[i]; k < starts[i + 1]; ++k) {
            const index_t j = cols[k];
            if (i == j) continue;
            const auto key = std::minmax(i, j);
            pair_sum[{key.first, key.second}] += std::abs(vals[k]);
        }
    }

    WeightedGraph g;
    g.num_nodes = n;
    g.adjacency.resize(n);
    for (const auto& [key, sum] : pair_sum) {
        const double w = 0.5 * sum;
        if (w <= 0.0) continue;  // both stored entries are exact zeros
        g.adjacency[key.first].push_back({key.second, w});
        g.adjacency[key.second].push_back({key.first, w});
    }
    for (auto& adj : g.adjacency)
        std::sort(adj.begin(), adj.end(),
                  [](const WeightedEdge& x, const WeightedEdge& y) {
                      return x.neighbor < y.neighbor;
                  });
    return g;
}

} // namespace bjgmres
