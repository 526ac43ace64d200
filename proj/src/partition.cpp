#include "bjgmres/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bjgmres {

Partition partition_from_assignment(std::vector<index_t> assignment, index_t s) {
    const index_t n = static_cast<index_t>(assignment.size());
    if (s < 1 || s > n)
        throw std::invalid_argument("partition: block count must satisfy 1 <= s <= n");
    std::vector<index_t> counts(s, 0);
    for (index_t b : assignment) {
        if (b < 0 || b >= s)
            throw std::out_of_range("partition: block index out of range");
        ++counts[b];
    }
    for (index_t b = 0; b < s; ++b)
        if (counts[b] == 0)
            throw std::invalid_argument("partition: block " + std::to_string(b) +
                                        " is empty");

    Partition p;
    p.num_blocks = s;
    p.block_starts.assign(s + 1, 0);
    for (index_t b = 0; b < s; ++b) p.block_starts[b + 1] = p.block_starts[b] + counts[b];

    // Stable gather: original order preserved within each block.
    p.perm.resize(n);
    std::vector<index_t> next(p.block_starts.begin(), p.block_starts.end() - 1);
    for (index_t i = 0; i < n; ++i) p.perm[i] = next[assignment[i]]++;
    p.assignment = std::move(assignment);
    p.block_nnz.assign(s, 0);
    return p;
}

namespace {

index_t pick_seed(const WeightedGraph& g, const std::vector<index_t>& assignment) {
    index_t seed = -1;
    index_t best_degree = 0;
    for (index_t v = 0; v < g.num_nodes; ++v) {
        if (assignment[v] >= 0 || g.degree(v) == 0) continue;
        if (seed < 0 || g.degree(v) > best_degree) {
            seed = v;
            best_degree = g.degree(v);
        }
    }
    return seed;
}

} // namespace

Partition partition_graph(const WeightedGraph& g, index_t s, double imbalance_tol) {
    const index_t n = g.num_nodes;
    if (s < 1) throw std::invalid_argument("partition_graph: s must be >= 1");
    if (s > n) throw std::invalid_argument("partition_graph: s exceeds node count");
    if (imbalance_tol < 0.0)
        throw std::invalid_argument("partition_graph: negative imbalance tolerance");

    const index_t cap = std::max<index_t>(
        static_cast<index_t>(std::ceil(static_cast<double>(n) / s * (1.0 + imbalance_tol))),
        (n + s - 1) / s);

    std::vector<index_t> assignment(n, -1);
    std::vector<index_t> sizes(s, 0);

    index_t connected_left = 0;
    for (index_t v = 0; v < n; ++v)
        if (g.degree(v) > 0) ++connected_left;

    // Region growing over the connected nodes.
    std::deque<index_t> queue;
    for (index_t b = 0; b < s && connected_left > 0; ++b) {
        const index_t blocks_left = s - b;
        index_t target = (connected_left + blocks_left - 1) / blocks_left;
        target = std::min(target, cap);
        queue.clear();
        index_t grown = 0;
        while (grown < target) {
            if (queue.empty()) {
                const index_t seed = pick_seed(g, assignment);
                if (seed < 0) break;
                queue.push_back(seed);
            }
            const index_t u = queue.front();
            queue.pop_front();
            if (assignment[u] >= 0) continue;
            assignment[u] = b;
            ++sizes[b];
            ++grown;
            --connected_left;
            for (const WeightedEdge& e : g.adjacency[u])
                if (assignment[e.neighbor] < 0) queue.push_back(e.neighbor);
        }
    }

    // Isolated nodes go to the currently smallest block.
    for (index_t v = 0; v < n; ++v) {
        if (assignment[v] >= 0) continue;
        index_t smallest = 0;
        for (index_t b = 1; b < s; ++b)
            if (sizes[b] < sizes[smallest]) smallest = b;
        assignment[v] = smallest;
        ++sizes[smallest];
    }

    // One boundary-refinement sweep: move a node to the neighboring block it
    // is most strongly connected to when that strictly reduces the cut and
    // keeps both blocks within the size constraints.
    std::vector<double> conn(s, 0.0);
    std::vector<index_t> touched;
    for (index_t u = 0; u < n; ++u) {
        const index_t bu = assignment[u];
        if (sizes[bu] <= 1) continue;
        touched.clear();
        for (const WeightedEdge& e : g.adjacency[u]) {
            const index_t bv = assignment[e.neighbor];
            if (conn[bv] == 0.0) touched.push_back(bv);
            conn[bv] += e.weight;
        }
        index_t best = -1;
        for (index_t bv : touched) {
            if (bv == bu || sizes[bv] + 1 > cap) continue;
            if (best < 0 || conn[bv] > conn[best] ||
                (conn[bv] == conn[best] && bv < best))
                best = bv;
        }
        if (best >= 0 && conn[best] > conn[bu]) {
            assignment[u] = best;
            --sizes[bu];
            ++sizes[best];
        }
        for (index_t bv : touched) conn[bv] = 0.0;
    }

    return partition_from_assignment(std::move(assignment), s);
}

Partition import_partition(std::istream& in, index_t n, index_t s) {
    std::vector<index_t> assignment;
    assignment.reserve(n);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        index_t b;
        if (!(ls >> b)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw std::runtime_error("partition file: line " +
                                     std::to_string(line_no) + ": malformed");
        }
        if (b < 0 || b >= s)
            throw std::out_of_range("partition file: line " + std::to_string(line_no) +
                                    ": block index " + std::to_string(b) +
                                    " out of range");
        assignment.push_back(b);
    }
    if (static_cast<index_t>(assignment.size()) != n)
        throw std::runtime_error("partition file: expected " + std::to_string(n) +
                                 " lines, got " + std::to_string(assignment.size()));
    return partition_from_assignment(std::move(assignment), s);
}

void export_partition(std::ostream& out, const Partition& p) {
    for (index_t b : p.assignment) out << b << "\n";
}

void measure_block_nnz(Partition& p, const SparseMatrix& a) {
    if (a.rows() != p.num_nodes())
        throw std::invalid_argument("measure_block_nnz: dimension mismatch");
    p.block_nnz.assign(p.num_blocks, 0);
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    for (index_t i = 0; i < a.rows(); ++i) {
        const index_t b = p.assignment[i];
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            if (p.assignment[cols[k]] == b) ++p.block_nnz[b];
    }
    index_t total = 0, max_nnz = 0;
    for (index_t c : p.block_nnz) {
        total += c;
        max_nnz = std::max(max_nnz, c);
    }
    const double mean = static_cast<double>(total) / static_cast<double>(p.num_blocks);
    p.imbalance = mean > 0.0 ? static_cast<double>(max_nnz) / mean : 0.0;
}

double cut_weight(const WeightedGraph& g, const Partition& p) {
    double cut = 0.0;
    for (index_t u = 0; u < g.num_nodes; ++u)
        for (const WeightedEdge& e : g.adjacency[u])
            if (u < e.neighbor && p.assignment[u] != p.assignment[e.neighbor])
                cut += e.weight;
    return cut;
}

} // namespace bjgmres
