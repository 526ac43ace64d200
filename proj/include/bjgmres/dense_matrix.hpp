#pragma once

#include <vector>

#include "bjgmres/types.hpp"

namespace bjgmres {

/// Minimal column-major dense matrix for Hessenberg bookkeeping.
struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(index_t i, index_t j) { return data[j * rows + i]; }
    const double& operator()(index_t i, index_t j) const {
        return data[j * rows + i];
    }
};

} // namespace bjgmres
