#include "bjgmres/sparse_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bjgmres {

namespace {

void check_invariants(index_t nrows, index_t ncols,
                      const std::vector<index_t>& row_starts,
                      const std::vector<index_t>& col_indices,
                      const std::vector<double>& values) {
    if (nrows < 0 || ncols < 0)
        throw std::invalid_argument("sparse matrix: negative dimension");
    if (row_starts.size() != static_cast<size_t>(nrows) + 1)
        throw std::invalid_argument("sparse matrix: row_starts length");
    if (row_starts.front() != 0 ||
        row_starts.back() != static_cast<index_t>(col_indices.size()) ||
        col_indices.size() != values.size())
        throw std::invalid_argument("sparse matrix: inconsistent sizes");
    for (index_t i = 0; i < nrows; ++i) {
        if (row_starts[i] > row_starts[i + 1])
            throw std::invalid_argument("sparse matrix: row_starts not non-decreasing");
        for (index_t k = row_starts[i]; k < row_starts[i + 1]; ++k) {
            if (col_indices[k] < 0 || col_indices[k] >= ncols)
                throw std::invalid_argument("sparse matrix: column index out of range");
            if (k > row_starts[i] && col_indices[k - 1] >= col_indices[k])
                throw std::invalid_argument("sparse matrix: columns not strictly increasing");
        }
    }
}

} // namespace

SparseMatrix::SparseMatrix(index_t nrows, index_t ncols,
                           std::vector<index_t> row_starts,
                           std::vector<index_t> col_indices,
                           std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_starts_(std::move(row_starts)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    check_invariants(nrows_, ncols_, row_starts_, col_indices_, values_);
}

SparseMatrix SparseMatrix::from_triplets(std::span<const Triplet> triplets,
                                         index_t nrows, index_t ncols) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw std::out_of_range("from_triplets: index (" + std::to_string(t.row) +
                                    ", " + std::to_string(t.col) + ") out of range");
    }
    std::vector<Triplet> sorted(triplets.begin(), triplets.end());
    // Tie-break duplicates on the value's bit pattern so the summation order,
    // and therefore the rounded sum, does not depend on the input order.
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return std::bit_cast<std::uint64_t>(a.value) <
               std::bit_cast<std::uint64_t>(b.value);
    });

    std::vector<index_t> starts(nrows + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(sorted.size());
    vals.reserve(sorted.size());
    for (size_t k = 0; k < sorted.size();) {
        const index_t r = sorted[k].row;
        const index_t c = sorted[k].col;
        double sum = 0.0;
        while (k < sorted.size() && sorted[k].row == r && sorted[k].col == c)
            sum += sorted[k++].value;
        cols.push_back(c);
        vals.push_back(sum);
        starts[r + 1] = static_cast<index_t>(cols.size());
    }
    for (index_t i = 0; i < nrows; ++i)
        starts[i + 1] = std::max(starts[i + 1], starts[i]);
    return SparseMatrix(nrows, ncols, std::move(starts), std::move(cols),
                        std::move(vals));
}

void SparseMatrix::materialize_low() {
    values_low_.resize(values_.size());
    for (size_t k = 0; k < values_.size(); ++k)
        values_low_[k] = static_cast<float>(values_[k]);
    low_valid_ = true;
}

std::span<const float> SparseMatrix::values_low() const {
    if (!low_valid_)
        throw std::logic_error("values_low requested before materialize_low()");
    return values_low_;
}

double SparseMatrix::value_at(index_t i, index_t j) const {
    if (i < 0 || i >= nrows_ || j < 0 || j >= ncols_)
        throw std::out_of_range("value_at: index out of range");
    const auto first = col_indices_.begin() + row_starts_[i];
    const auto last = col_indices_.begin() + row_starts_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<size_t>(it - col_indices_.begin())];
}

SparseMatrix permute_symmetric(const SparseMatrix& a,
                               std::span<const index_t> perm) {
    const index_t n = a.rows();
    if (a.cols() != n)
        throw std::invalid_argument("permute_symmetric: matrix must be square");
    if (static_cast<index_t>(perm.size()) != n)
        throw std::invalid_argument("permute_symmetric: permutation length");
    std::vector<bool> seen(n, false);
    for (index_t p : perm) {
        if (p < 0 || p >= n || seen[p])
            throw std::invalid_argument("permute_symmetric: not a bijection");
        seen[p] = true;
    }

    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values();

    std::vector<index_t> new_starts(n + 1, 0);
    for (index_t i = 0; i < n; ++i)
        new_starts[perm[i] + 1] = starts[i + 1] - starts[i];
    for (index_t i = 0; i < n; ++i) new_starts[i + 1] += new_starts[i];

    std::vector<index_t> new_cols(a.nnz());
    std::vector<double> new_vals(a.nnz());
    std::vector<std::pair<index_t, double>> row;
    for (index_t i = 0; i < n; ++i) {
        row.clear();
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            row.emplace_back(perm[cols[k]], vals[k]);
        std::sort(row.begin(), row.end());
        index_t dst = new_starts[perm[i]];
        for (const auto& [c, v] : row) {
            new_cols[dst] = c;
            new_vals[dst] = v;
            ++dst;
        }
    }
    return SparseMatrix(n, n, std::move(new_starts), std::move(new_cols),
                        std::move(new_vals));
}

double matrix_inf_norm(const SparseMatrix& a) {
    const auto starts = a.row_starts();
    const auto vals = a.values();
    double norm = 0.0;
    for (index_t i = 0; i < a.rows(); ++i) {
        double row_sum = 0.0;
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            row_sum += std::abs(vals[k]);
        norm = std::max(norm, row_sum);
    }
    return norm;
}

double matrix_one_norm(const SparseMatrix& a) {
    std::vector<double> col_sum(a.cols(), 0.0);
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (index_t k = 0; k < a.nnz(); ++k) col_sum[cols[k]] += std::abs(vals[k]);
    double norm = 0.0;
    for (double s : col_sum) norm = std::max(norm, s);
    return norm;
}

} // namespace bjgmres
