#include "bjgmres/preconditioner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <utility>

#include "bjgmres/spmv.hpp"

namespace bjgmres {

double block_error_bound(double cond_estimate, double eps_low, double eps_high) {
    return (cond_estimate * eps_high + eps_low) * cond_estimate;
}

namespace {

/// Rows and columns [begin, end) of a, reindexed to start at zero.
SparseMatrix slice_diag_block(const SparseMatrix& a, index_t begin, index_t end) {
    const index_t dim = end - begin;
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    std::vector<index_t> bstarts(dim + 1, 0);
    std::vector<index_t> bcols;
    std::vector<double> bvals;
    for (index_t i = begin; i < end; ++i) {
        for (index_t k = starts[i]; k < starts[i + 1]; ++k) {
            const index_t j = cols[k];
            if (j >= begin && j < end) {
                bcols.push_back(j - begin);
                bvals.push_back(vals[k]);
            }
        }
        bstarts[i - begin + 1] = static_cast<index_t>(bcols.size());
    }
    return SparseMatrix(dim, dim, std::move(bstarts), std::move(bcols),
                        std::move(bvals));
}

double inverse_one_norm_dense(const LUFactors& f) {
    const index_t n = f.n;
    std::vector<double> e(n, 0.0), col(n);
    double best = 0.0;
    for (index_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        lu_solve<double>(f, e, col);
        e[j] = 0.0;
        double sum = 0.0;
        for (double v : col) sum += std::abs(v);
        best = std::max(best, sum);
    }
    return best;
}

double inverse_one_norm_hager(const LUFactors& f) {
    const index_t n = f.n;
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::vector<double> y(n), xi(n), z(n);
    double est = 0.0;
    for (int iter = 0; iter < 8; ++iter) {
        lu_solve<double>(f, x, y);
        est = 0.0;
        for (double v : y) est += std::abs(v);
        for (index_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
        lu_solve_transpose(f, xi, z);
        index_t jmax = 0;
        for (index_t i = 1; i < n; ++i)
            if (std::abs(z[i]) > std::abs(z[jmax])) jmax = i;
        double ztx = 0.0;
        for (index_t i = 0; i < n; ++i) ztx += z[i] * x[i];
        if (std::abs(z[jmax]) <= ztx) break;
        std::fill(x.begin(), x.end(), 0.0);
        x[jmax] = 1.0;
    }
    return est;
}

} // namespace

double cond_estimate_block(const LUFactors& factors, const SparseMatrix& block) {
    const double norm_m = matrix_one_norm(block);
    if (factors.n == 0) return 1.0;
    const double norm_inv = factors.n <= 64 ? inverse_one_norm_dense(factors)
                                            : inverse_one_norm_hager(factors);
    return norm_m * norm_inv;
}

Preconditioner Preconditioner::identity(index_t n) {
    return Preconditioner(Kind::Identity, n);
}

Preconditioner Preconditioner::from_ilu0(const SparseMatrix& a) {
    Preconditioner p(Kind::Ilu0, a.rows());
    p.ilu_ = std::make_shared<const LUFactors>(ilu0(a));
    return p;
}

Preconditioner Preconditioner::block_jacobi(const SparseMatrix& a,
                                            Partition partition,
                                            const BlockJacobiOptions& opts) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("block_jacobi: matrix must be square");
    if (partition.num_nodes() != a.rows())
        throw std::invalid_argument("block_jacobi: partition does not cover the matrix");

    auto data = std::make_shared<BlockJacobiData>();
    data->partition = std::move(partition);
    data->neumann_order = opts.neumann_order;
    measure_block_nnz(data->partition, a);

    const Partition& part = data->partition;
    const SparseMatrix permuted = permute_symmetric(a, part.perm);
    const index_t s = part.num_blocks;
    data->blocks.reserve(s);
    for (index_t b = 0; b < s; ++b)
        data->blocks.push_back(
            slice_diag_block(permuted, part.block_starts[b], part.block_starts[b + 1]));

    data->factors.resize(s);
    data->stats.resize(s);
    std::vector<std::exception_ptr> errors(s);
    const bool parallel = opts.parallel_build;
#pragma omp parallel for schedule(dynamic) if (parallel && s > 1)
    for (index_t b = 0; b < s; ++b) {
        try {
            LUFactors f = gp_lu(data->blocks[b], opts.eps_pivot);
            PreconditionerStats st;
            st.block_dim = f.n;
            st.block_nnz = data->blocks[b].nnz();
            st.perturbation_count = static_cast<index_t>(f.perturbations.size());
            if (opts.with_cond_estimates) {
                st.cond_estimate = cond_estimate_block(f, data->blocks[b]);
                const double eps_low = opts.policy.hybrid() ? kRoundoffSingle
                                                            : kRoundoffDouble;
                st.error_bound =
                    block_error_bound(st.cond_estimate, eps_low, kRoundoffDouble);
            }
            if (opts.policy.hybrid()) f.materialize_low();
            data->factors[b] = std::move(f);
            data->stats[b] = st;
        } catch (...) {
            errors[b] = std::current_exception();
        }
    }
    for (index_t b = 0; b < s; ++b)
        if (errors[b]) std::rethrow_exception(errors[b]);

    Preconditioner p(Kind::BlockJacobi, a.rows());
    p.bj_ = std::move(data);
    return p;
}

int Preconditioner::neumann_order() const {
    return bj_ ? bj_->neumann_order : 0;
}

template <class T, bool Parallel>
void Preconditioner::apply_impl(std::span<const T> v, std::span<T> z) const {
    if (static_cast<index_t>(v.size()) != n_ ||
        static_cast<index_t>(z.size()) != n_)
        throw std::invalid_argument("preconditioner apply: dimension mismatch");
    switch (kind_) {
        case Kind::Identity:
            std::copy(v.begin(), v.end(), z.begin());
            return;
        case Kind::Ilu0:
            lu_solve<T>(*ilu_, v, z);
            return;
        case Kind::BlockJacobi: {
            const Partition& part = bj_->partition;
            std::vector<T> w(n_), y(n_);
            for (index_t i = 0; i < n_; ++i) w[part.perm[i]] = v[i];
            const index_t s = part.num_blocks;
#pragma omp parallel for schedule(dynamic) if (Parallel && s > 1)
            for (index_t b = 0; b < s; ++b) {
                const index_t begin = part.block_starts[b];
                const index_t len = part.block_starts[b + 1] - begin;
                lu_solve<T>(bj_->factors[b],
                            std::span<const T>(w.data() + begin, len),
                            std::span<T>(y.data() + begin, len));
            }
            for (index_t i = 0; i < n_; ++i) z[i] = y[part.perm[i]];
            return;
        }
    }
}

template <class T>
void Preconditioner::apply(std::span<const T> v, std::span<T> z) const {
    apply_impl<T, true>(v, z);
}

template <class T>
void Preconditioner::apply_serial(std::span<const T> v, std::span<T> z) const {
    apply_impl<T, false>(v, z);
}

template <class T>
std::vector<T> Preconditioner::apply_neumann(const SparseMatrix& a,
                                             std::span<const T> v, int k) const {
    if (kind_ != Kind::BlockJacobi)
        throw std::logic_error("apply_neumann: block factors not available");
    if (k < 0 || k > bj_->neumann_order)
        throw std::invalid_argument(
            "apply_neumann: order exceeds the one the preconditioner was built with");
    std::vector<T> term = apply<T>(v);
    std::vector<T> acc = term;
    std::vector<T> tmp(n_);
    for (int i = 1; i <= k; ++i) {
        spmv<T>(a, term, tmp);               // A t
        std::vector<T> corr = apply<T>(std::span<const T>(tmp));  // Phi^-1 A t
        for (index_t j = 0; j < n_; ++j) {
            term[j] = term[j] - corr[j];     // t <- (I - Phi^-1 A) t
            acc[j] += term[j];
        }
    }
    return acc;
}

template void Preconditioner::apply<double>(std::span<const double>,
                                            std::span<double>) const;
template void Preconditioner::apply<float>(std::span<const float>,
                                           std::span<float>) const;
template void Preconditioner::apply_serial<double>(std::span<const double>,
                                                   std::span<double>) const;
template void Preconditioner::apply_serial<float>(std::span<const float>,
                                                  std::span<float>) const;
template std::vector<double> Preconditioner::apply_neumann<double>(
    const SparseMatrix&, std::span<const double>, int) const;
template std::vector<float> Preconditioner::apply_neumann<float>(
    const SparseMatrix&, std::span<const float>, int) const;

} // namespace bjgmres
