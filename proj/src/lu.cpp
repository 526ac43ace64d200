#include "bjgmres/lu.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace bjgmres {

PivotRegularization regularize_pivot(double pivot, double block_inf_norm,
                                     double eps_pivot) {
    if (block_inf_norm < 0.0)
        throw std::invalid_argument("regularize_pivot: negative norm");
    const bool keep = block_inf_norm == 0.0
                          ? pivot != 0.0
                          : std::abs(pivot) / block_inf_norm >= eps_pivot;
    if (keep) return {pivot, false};
    const double sign = pivot < 0.0 ? -1.0 : 1.0;
    return {sign * eps_pivot * block_inf_norm, true};
}

namespace {

struct CscMatrix {
    index_t n = 0;
    std::vector<index_t> col_starts;
    std::vector<index_t> row_indices;
    std::vector<double> values;
};

CscMatrix csr_to_csc(const SparseMatrix& a) {
    CscMatrix m;
    m.n = a.rows();
    m.col_starts.assign(a.cols() + 1, 0);
    m.row_indices.resize(a.nnz());
    m.values.resize(a.nnz());
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (index_t k = 0; k < a.nnz(); ++k) ++m.col_starts[cols[k] + 1];
    for (index_t j = 0; j < a.cols(); ++j) m.col_starts[j + 1] += m.col_starts[j];
    std::vector<index_t> next(m.col_starts.begin(), m.col_starts.end() - 1);
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t k = starts[i]; k < starts[i + 1]; ++k) {
            const index_t dst = next[cols[k]]++;
            m.row_indices[dst] = i;
            m.values[dst] = vals[k];
        }
    return m;
}

struct ColEntry {
    index_t row;
    double value;
};

/// Columns accumulated during factorization; converted to CSR at the end.
SparseMatrix columns_to_csr(index_t n, const std::vector<std::vector<ColEntry>>& cols) {
    std::vector<index_t> starts(n + 1, 0);
    index_t nnz = 0;
    for (const auto& c : cols) nnz += static_cast<index_t>(c.size());
    for (const auto& c : cols)
        for (const ColEntry& e : c) ++starts[e.row + 1];
    for (index_t i = 0; i < n; ++i) starts[i + 1] += starts[i];
    std::vector<index_t> col_idx(nnz);
    std::vector<double> values(nnz);
    std::vector<index_t> next(starts.begin(), starts.end() - 1);
    for (index_t j = 0; j < n; ++j)
        for (const ColEntry& e : cols[j]) {
            const index_t dst = next[e.row]++;
            col_idx[dst] = j;
            values[dst] = e.value;
        }
    return SparseMatrix(n, n, std::move(starts), std::move(col_idx),
                        std::move(values));
}

/// Depth-first search over the partial L pattern; emits the reach of the
/// seed set in topological order (dependencies first).
class ReachFinder {
public:
    explicit ReachFinder(index_t n)
        : mark_(n, 0), node_stack_(), child_stack_(), epoch_(0) {}

    void compute(std::span<const index_t> seeds,
                 const std::vector<std::vector<ColEntry>>& l_cols,
                 const std::vector<index_t>& pinv, std::vector<index_t>& topo) {
        ++epoch_;
        topo.clear();
        for (index_t seed : seeds) {
            if (mark_[seed] == epoch_) continue;
            node_stack_.push_back(seed);
            child_stack_.push_back(0);
            mark_[seed] = epoch_;
            while (!node_stack_.empty()) {
                const index_t u = node_stack_.back();
                const index_t c = pinv[u];
                const auto* children = c >= 0 ? &l_cols[c] : nullptr;
                const index_t deg =
                    children ? static_cast<index_t>(children->size()) : 0;
                bool descended = false;
                while (child_stack_.back() < deg) {
                    const index_t v = (*children)[child_stack_.back()++].row;
                    if (mark_[v] != epoch_) {
                        mark_[v] = epoch_;
                        node_stack_.push_back(v);
                        child_stack_.push_back(0);
                        descended = true;
                        break;
                    }
                }
                if (!descended) {
                    node_stack_.pop_back();
                    child_stack_.pop_back();
                    post_.push_back(u);
                }
            }
        }
        // Reverse postorder = topological order.
        topo.assign(post_.rbegin(), post_.rend());
        post_.clear();
    }

private:
    std::vector<index_t> mark_;
    std::vector<index_t> node_stack_;
    std::vector<index_t> child_stack_;
    std::vector<index_t> post_;
    index_t epoch_;
};

} // namespace

LUFactors gp_lu(const SparseMatrix& block, double eps_pivot) {
    const index_t n = block.rows();
    if (block.cols() != n)
        throw std::invalid_argument("gp_lu: block must be square");
    if (eps_pivot < 0.0) throw std::invalid_argument("gp_lu: negative eps_pivot");

    const double norm = matrix_inf_norm(block);
    const CscMatrix acsc = csr_to_csc(block);

    std::vector<std::vector<ColEntry>> l_cols(n);
    std::vector<std::vector<ColEntry>> u_cols(n);
    std::vector<index_t> pinv(n, -1);
    std::vector<index_t> pivot_rows(n, -1);
    std::vector<PerturbationRecord> perturbations;

    std::vector<double> x(n, 0.0);
    std::vector<index_t> topo;
    ReachFinder reach(n);
    index_t next_unused = 0;  // cursor for structurally empty columns

    for (index_t k = 0; k < n; ++k) {
        const std::span<const index_t> seeds{
            acsc.row_indices.data() + acsc.col_starts[k],
            static_cast<size_t>(acsc.col_starts[k + 1] - acsc.col_starts[k])};
        reach.compute(seeds, l_cols, pinv, topo);

        // Sparse solve L * x = A(:, k) over the reach set.
        for (index_t t = acsc.col_starts[k]; t < acsc.col_starts[k + 1]; ++t)
            x[acsc.row_indices[t]] = acsc.values[t];
        for (index_t j : topo) {
            const index_t c = pinv[j];
            if (c < 0) continue;
            const double xj = x[j];
            if (xj != 0.0)
                for (const ColEntry& e : l_cols[c]) x[e.row] -= e.value * xj;
        }

        // Partial pivoting over the not-yet-pivotal rows.
        index_t pivot_row = -1;
        double pivot_abs = -1.0;
        for (index_t i : topo) {
            if (pinv[i] >= 0) continue;
            const double t = std::abs(x[i]);
            if (t > pivot_abs || (t == pivot_abs && i < pivot_row)) {
                pivot_abs = t;
                pivot_row = i;
            }
        }
        if (pivot_row < 0) {
            // Structurally empty sub-column: take the smallest unused row.
            while (pinv[next_unused] >= 0) ++next_unused;
            pivot_row = next_unused;
        }

        const double pivot_value = x[pivot_row];
        const auto reg = regularize_pivot(pivot_value, norm, eps_pivot);
        if (reg.value == 0.0) {
            for (index_t i : topo) x[i] = 0.0;
            throw SingularBlockError(
                "gp_lu: singular block, zero pivot in column " + std::to_string(k),
                k);
        }
        if (reg.perturbed)
            perturbations.push_back({k, pivot_value, reg.value});

        pinv[pivot_row] = k;
        pivot_rows[k] = pivot_row;
        u_cols[k].push_back({k, reg.value});  // diagonal first
        for (index_t i : topo) {
            if (i == pivot_row) continue;
            if (pinv[i] >= 0) {
                u_cols[k].push_back({pinv[i], x[i]});
            } else if (x[i] != 0.0) {
                l_cols[k].push_back({i, x[i] / reg.value});
            }
        }
        for (index_t i : topo) x[i] = 0.0;
    }

    // Remap L rows into pivot numbering; every row is pivotal by now.
    for (auto& col : l_cols)
        for (ColEntry& e : col) e.row = pinv[e.row];

    LUFactors f;
    f.n = n;
    f.lower = columns_to_csr(n, l_cols);
    f.upper = columns_to_csr(n, u_cols);
    f.pivot_rows = std::move(pivot_rows);
    f.perturbations = std::move(perturbations);
    f.kind = FactorKind::Exact;
    return f;
}

LUFactors ilu0(const SparseMatrix& a) {
    const index_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("ilu0: matrix must be square");
    const auto starts = a.row_starts();
    const auto cols = a.col_indices();
    std::vector<double> vals(a.values().begin(), a.values().end());

    std::vector<index_t> diag_pos(n, -1);
    for (index_t i = 0; i < n; ++i)
        for (index_t k = starts[i]; k < starts[i + 1]; ++k)
            if (cols[k] == i) diag_pos[i] = k;
    for (index_t i = 0; i < n; ++i)
        if (diag_pos[i] < 0)
            throw std::invalid_argument(
                "ilu0: structurally zero diagonal in row " + std::to_string(i));

    // Row-wise i-k-j updates restricted to the pattern of A.
    for (index_t i = 0; i < n; ++i) {
        for (index_t p = starts[i]; p < starts[i + 1] && cols[p] < i; ++p) {
            const index_t k = cols[p];
            const double ukk = vals[diag_pos[k]];
            if (ukk == 0.0)
                throw std::runtime_error("ilu0: zero diagonal pivot in row " +
                                         std::to_string(k));
            const double lik = vals[p] / ukk;
            vals[p] = lik;
            index_t r = p + 1;
            index_t q = diag_pos[k] + 1;
            while (r < starts[i + 1] && q < starts[k + 1]) {
                if (cols[r] == cols[q]) {
                    vals[r] -= lik * vals[q];
                    ++r;
                    ++q;
                } else if (cols[r] < cols[q]) {
                    ++r;
                } else {
                    ++q;
                }
            }
        }
    }
    for (index_t i = 0; i < n; ++i)
        if (vals[diag_pos[i]] == 0.0)
            throw std::runtime_error("ilu0: zero diagonal pivot in row " +
                                     std::to_string(i));

    // Split into strictly lower L and upper U (diagonal first per row).
    std::vector<index_t> lstarts(n + 1, 0), ustarts(n + 1, 0);
    std::vector<index_t> lcols, ucols;
    std::vector<double> lvals, uvals;
    for (index_t i = 0; i < n; ++i) {
        for (index_t k = starts[i]; k < starts[i + 1]; ++k) {
            if (cols[k] < i) {
                lcols.push_back(cols[k]);
                lvals.push_back(vals[k]);
            } else if (cols[k] > i) {
                ucols.push_back(cols[k]);
                uvals.push_back(vals[k]);
            }
        }
        lstarts[i + 1] = static_cast<index_t>(lcols.size());
    }
    // Rebuild U with the diagonal leading each row.
    ucols.clear();
    uvals.clear();
    for (index_t i = 0; i < n; ++i) {
        ucols.push_back(i);
        uvals.push_back(vals[diag_pos[i]]);
        for (index_t k = diag_pos[i] + 1; k < starts[i + 1]; ++k) {
            ucols.push_back(cols[k]);
            uvals.push_back(vals[k]);
        }
        ustarts[i + 1] = static_cast<index_t>(ucols.size());
    }

    LUFactors f;
    f.n = n;
    f.lower = SparseMatrix(n, n, std::move(lstarts), std::move(lcols),
                           std::move(lvals));
    f.upper = SparseMatrix(n, n, std::move(ustarts), std::move(ucols),
                           std::move(uvals));
    f.pivot_rows.resize(n);
    for (index_t i = 0; i < n; ++i) f.pivot_rows[i] = i;
    f.kind = FactorKind::Ilu0;
    return f;
}

void lu_solve_transpose(const LUFactors& f, std::span<const double> rhs,
                        std::span<double> x) {
    const index_t n = f.n;
    if (static_cast<index_t>(rhs.size()) != n ||
        static_cast<index_t>(x.size()) != n)
        throw std::invalid_argument("lu_solve_transpose: dimension mismatch");
    const auto lst = f.lower.row_starts();
    const auto lcol = f.lower.col_indices();
    const auto lval = f.lower.values();
    const auto ust = f.upper.row_starts();
    const auto ucol = f.upper.col_indices();
    const auto uval = f.upper.values();

    // w = U^-T rhs: U^T is lower triangular, traversed by columns of U.
    std::vector<double> w(rhs.begin(), rhs.end());
    for (index_t i = 0; i < n; ++i) {
        const index_t d = ust[i];
        w[i] /= uval[d];
        for (index_t k = d + 1; k < ust[i + 1]; ++k) w[ucol[k]] -= uval[k] * w[i];
    }
    // y = L^-T w: unit upper triangular transpose solve.
    for (index_t i = n - 1; i >= 0; --i)
        for (index_t k = lst[i]; k < lst[i + 1]; ++k) w[lcol[k]] -= lval[k] * w[i];
    // x = P^T y.
    for (index_t k = 0; k < n; ++k) x[f.pivot_rows[k]] = w[k];
}

} // namespace bjgmres
