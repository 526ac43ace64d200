#pragma once

#include <span>
#include <vector>

#include "bjgmres/types.hpp"

namespace bjgmres {

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Compressed-sparse-row matrix. binary64 values are the master copy;
/// a binary32 copy can be materialized for low-precision kernels and is
/// never written to independently.
///
/// Invariants: row_starts is non-decreasing with row_starts[0] == 0 and
/// row_starts[nrows] == nnz; column indices are strictly increasing within
/// each row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(index_t nrows, index_t ncols, std::vector<index_t> row_starts,
                 std::vector<index_t> col_indices, std::vector<double> values);

    /// Duplicate entries are summed; the result is independent of the order
    /// of the input triplets (duplicates are combined in a canonical order).
    static SparseMatrix from_triplets(std::span<const Triplet> triplets,
                                      index_t nrows, index_t ncols);

    index_t rows() const { return nrows_; }
    index_t cols() const { return ncols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    std::span<const index_t> row_starts() const { return row_starts_; }
    std::span<const index_t> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    /// Round each binary64 value to nearest binary32. Call once during setup,
    /// before the matrix is shared across threads.
    void materialize_low();
    bool has_low() const { return low_valid_; }
    std::span<const float> values_low() const;

    template <class T>
    std::span<const T> values_as() const;

    /// Value at (i, j), 0 if the position is structurally absent.
    double value_at(index_t i, index_t j) const;

private:
    index_t nrows_ = 0;
    index_t ncols_ = 0;
    std::vector<index_t> row_starts_{0};
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
    std::vector<float> values_low_;
    bool low_valid_ = false;
};

template <>
inline std::span<const double> SparseMatrix::values_as<double>() const {
    return values();
}
template <>
inline std::span<const float> SparseMatrix::values_as<float>() const {
    return values_low();
}

/// B[p(i), p(j)] = A[i, j] for a bijection p on 0..n-1.
SparseMatrix permute_symmetric(const SparseMatrix& a,
                               std::span<const index_t> perm);

/// Max over rows of the sum of absolute values.
double matrix_inf_norm(const SparseMatrix& a);

/// Max over columns of the sum of absolute values.
double matrix_one_norm(const SparseMatrix& a);

} // namespace bjgmres
