#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

/// y = A*x in the precision of T, accumulating each row left to right.
/// Rows are independent, so the parallel version is bit-identical to the
/// serial one for any thread count.
template <class T>
void spmv_serial(const SparseMatrix& a, std::span<const T> x, std::span<T> y) {
    if (static_cast<index_t>(x.size()) != a.cols() ||
        static_cast<index_t>(y.size()) != a.rows())
        throw std::invalid_argument("spmv: dimension mismatch");
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values_as<T>();
    for (index_t i = 0; i < a.rows(); ++i) {
        T sum = T(0);
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            sum += vals[k] * x[cols[k]];
        y[i] = sum;
    }
}

template <class T>
void spmv(const SparseMatrix& a, std::span<const T> x, std::span<T> y) {
    if (static_cast<index_t>(x.size()) != a.cols() ||
        static_cast<index_t>(y.size()) != a.rows())
        throw std::invalid_argument("spmv: dimension mismatch");
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values_as<T>();
    const index_t nrows = a.rows();
#pragma omp parallel for schedule(static) if (nrows > 4096)
    for (index_t i = 0; i < nrows; ++i) {
        T sum = T(0);
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            sum += vals[k] * x[cols[k]];
        y[i] = sum;
    }
}

template <class T>
std::vector<T> spmv(const SparseMatrix& a, std::span<const T> x) {
    std::vector<T> y(a.rows());
    spmv<T>(a, x, y);
    return y;
}

} // namespace bjgmres
