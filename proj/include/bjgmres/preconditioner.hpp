#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bjgmres/lu.hpp"
#include "bjgmres/partition.hpp"
#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

struct PreconditionerStats {
    index_t block_dim = 0;
    index_t block_nnz = 0;
    index_t perturbation_count = 0;
    double cond_estimate = 0.0;
    double error_bound = 0.0;
};

/// Normalized relative-error bound for a block applied in low precision:
/// (cond * eps_high + eps_low) * cond. The unknowable leading constant is
/// taken as 1, which preserves the cond^2 scaling that matters.
double block_error_bound(double cond_estimate, double eps_low, double eps_high);

/// 1-norm condition estimate of the factored block: exact dense computation
/// for dims <= 64, otherwise a Hager-style power iteration on the inverse.
/// The estimator is a lower bound on cond_1.
double cond_estimate_block(const LUFactors& factors, const SparseMatrix& block);

struct BlockJacobiOptions {
    double eps_pivot = 1e-10;
    int neumann_order = 0;  // 0 = direct block solves
    PrecisionPolicy policy{};
    bool parallel_build = true;
    bool with_cond_estimates = true;
};

struct BlockJacobiData {
    Partition partition;
    std::vector<SparseMatrix> blocks;   // diagonal blocks of Q A Q^T
    std::vector<LUFactors> factors;     // binary64 masters (+ binary32 copies in hybrid)
    std::vector<PreconditionerStats> stats;
    int neumann_order = 0;
};

/// Block-diagonal preconditioner (plus identity and ILU(0) variants behind
/// the same apply interface). Immutable after construction.
class Preconditioner {
public:
    enum class Kind { Identity, Ilu0, BlockJacobi };

    static Preconditioner identity(index_t n);
    static Preconditioner from_ilu0(const SparseMatrix& a);

    /// Permutes A by the partition's Q, slices the diagonal blocks, factors
    /// each with gp_lu in binary64; off-block entries are discarded. Hybrid
    /// policy additionally materializes binary32 factor copies.
    static Preconditioner block_jacobi(const SparseMatrix& a, Partition partition,
                                       const BlockJacobiOptions& opts = {});

    index_t dim() const { return n_; }
    Kind kind() const { return kind_; }
    int neumann_order() const;

    /// z with M z = v; blocks solve independently (parallel across blocks).
    template <class T>
    void apply(std::span<const T> v, std::span<T> z) const;
    template <class T>
    void apply_serial(std::span<const T> v, std::span<T> z) const;
    template <class T>
    std::vector<T> apply(std::span<const T> v) const {
        std::vector<T> z(v.size());
        apply<T>(v, z);
        return z;
    }

    /// Truncated Neumann application z = sum_{i=0..k} (I - Phi^-1 A)^i Phi^-1 v
    /// by Horner-style repeated application; k = 0 reduces to block solves.
    template <class T>
    std::vector<T> apply_neumann(const SparseMatrix& a, std::span<const T> v,
                                 int k) const;

    const BlockJacobiData* block_jacobi_data() const { return bj_.get(); }
    const LUFactors* ilu_factors() const { return ilu_.get(); }

private:
    Preconditioner(Kind kind, index_t n) : kind_(kind), n_(n) {}

    template <class T, bool Parallel>
    void apply_impl(std::span<const T> v, std::span<T> z) const;

    Kind kind_ = Kind::Identity;
    index_t n_ = 0;
    std::shared_ptr<const LUFactors> ilu_;
    std::shared_ptr<const BlockJacobiData> bj_;
};

} // namespace bjgmres
