#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

enum class FactorKind { Exact, Ilu0 };

/// One near-singular pivot replaced by +-eps_pivot * ||block||_inf.
struct PerturbationRecord {
    index_t pivot_index;
    double original_value;
    double replaced_value;
};

struct PivotRegularization {
    double value;
    bool perturbed;
};

/// Near-zero pivots are pushed away from zero: if |pivot| / block_inf_norm
/// falls below eps_pivot the pivot becomes sign(pivot) * eps_pivot *
/// block_inf_norm, with sign(0) taken as +1 so an exact zero still yields a
/// nonsingular factor.
PivotRegularization regularize_pivot(double pivot, double block_inf_norm,
                                     double eps_pivot);

/// Sparse triangular factors P*A = L*U. L is strictly lower triangular in
/// CSR with an implicit unit diagonal; U is upper triangular in CSR with the
/// diagonal stored first in each row. pivot_rows[k] is the original row
/// pivoted into position k.
struct LUFactors {
    index_t n = 0;
    SparseMatrix lower;
    SparseMatrix upper;
    std::vector<index_t> pivot_rows;
    std::vector<PerturbationRecord> perturbations;
    FactorKind kind = FactorKind::Exact;

    /// Cast factor values to binary32 for low-precision solves.
    void materialize_low() {
        lower.materialize_low();
        upper.materialize_low();
    }
};

class SingularBlockError : public std::runtime_error {
public:
    SingularBlockError(const std::string& what, index_t column)
        : std::runtime_error(what), column_(column) {}
    index_t column() const { return column_; }

private:
    index_t column_;
};

/// Left-looking column-by-column sparse LU with partial pivoting
/// (largest-magnitude eligible pivot, ties to the smallest row index).
/// Each chosen pivot passes through regularize_pivot; changes are recorded.
LUFactors gp_lu(const SparseMatrix& block, double eps_pivot);

/// Incomplete LU restricted to the pattern of A, row-wise i-k-j updates,
/// no pivoting and no regularization. A must have a structurally nonzero
/// diagonal.
LUFactors ilu0(const SparseMatrix& a);

/// x = U \ (L \ (P*rhs)) computed entirely in the precision of T.
template <class T>
void lu_solve(const LUFactors& f, std::span<const T> rhs, std::span<T> x);

template <class T>
std::vector<T> lu_solve(const LUFactors& f, std::span<const T> rhs) {
    std::vector<T> x(rhs.size());
    lu_solve<T>(f, rhs, x);
    return x;
}

/// x = A^-T rhs via transpose solves with the same factors (binary64 only;
/// used by the condition estimator).
void lu_solve_transpose(const LUFactors& f, std::span<const double> rhs,
                        std::span<double> x);

template <class T>
void lu_solve(const LUFactors& f, std::span<const T> rhs, std::span<T> x) {
    const index_t n = f.n;
    if (static_cast<index_t>(rhs.size()) != n ||
        static_cast<index_t>(x.size()) != n)
        throw std::invalid_argument("lu_solve: dimension mismatch");
    const auto lst = f.lower.row_starts();
    const auto lcol = f.lower.col_indices();
    const auto lval = f.lower.values_as<T>();
    const auto ust = f.upper.row_starts();
    const auto ucol = f.upper.col_indices();
    const auto uval = f.upper.values_as<T>();

    for (index_t i = 0; i < n; ++i) {
        T s = rhs[f.pivot_rows[i]];
        for (index_t k = lst[i]; k < lst[i + 1]; ++k) s -= lval[k] * x[lcol[k]];
        x[i] = s;
    }
    for (index_t i = n - 1; i >= 0; --i) {
        const index_t d = ust[i];  // diagonal is first in the row
        T s = x[i];
        for (index_t k = d + 1; k < ust[i + 1]; ++k) s -= uval[k] * x[ucol[k]];
        x[i] = s / uval[d];
    }
}

} // namespace bjgmres
