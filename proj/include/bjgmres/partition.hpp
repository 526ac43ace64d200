#pragma once

#include <iosfwd>
#include <vector>

#include "bjgmres/graph.hpp"
#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

/// An s-way node partition together with the symmetric permutation that
/// gathers each block's nodes contiguously (blocks in ascending order,
/// original node order preserved within a block).
struct Partition {
    index_t num_blocks = 0;
    std::vector<index_t> assignment;    // node -> block
    std::vector<index_t> perm;          // old index -> new index
    std::vector<index_t> block_starts;  // size num_blocks + 1, over new indices
    std::vector<index_t> block_nnz;     // filled by measure_block_nnz
    double imbalance = 0.0;             // max block_nnz / mean block_nnz

    index_t num_nodes() const { return static_cast<index_t>(assignment.size()); }
    index_t block_size(index_t b) const {
        return block_starts[b + 1] - block_starts[b];
    }
};

/// Validates the assignment (every block nonempty) and derives perm and
/// block_starts by a stable gather.
Partition partition_from_assignment(std::vector<index_t> assignment, index_t s);

/// Greedy BFS region growing from highest-degree seeds, then one
/// boundary-refinement sweep. Node-count balance is enforced within
/// (1 + imbalance_tol) of the mean during growth and refinement.
/// Deterministic: ties break on ascending node index; isolated nodes go
/// round-robin to the currently smallest block.
Partition partition_graph(const WeightedGraph& g, index_t s,
                          double imbalance_tol = 0.1);

/// One 0-based block index per line, n lines.
Partition import_partition(std::istream& in, index_t n, index_t s);
void export_partition(std::ostream& out, const Partition& p);

/// Fills block_nnz (nonzeros of the induced diagonal blocks) and the
/// nnz imbalance ratio.
void measure_block_nnz(Partition& p, const SparseMatrix& a);

/// Total weight of edges crossing between blocks.
double cut_weight(const WeightedGraph& g, const Partition& p);

} // namespace bjgmres
