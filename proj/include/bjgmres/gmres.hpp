#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bjgmres/dense_matrix.hpp"
#include "bjgmres/dense_ops.hpp"
#include "bjgmres/preconditioner.hpp"
#include "bjgmres/sparse_matrix.hpp"
#include "bjgmres/types.hpp"

namespace bjgmres {

/// Arnoldi basis in working precision T with the Hessenberg matrix kept in
/// binary64. hess is (m_max+1) x m_max; column j is filled at step j+1.
template <class T>
struct ArnoldiState {
    index_t dim = 0;
    index_t m_max = 0;
    std::vector<std::vector<T>> basis;
    DenseMatrix hess;
    index_t steps = 0;
    bool breakdown = false;

    ArnoldiState(index_t n, index_t m, std::vector<T> v1)
        : dim(n), m_max(m), hess(m + 1, m) {
        if (static_cast<index_t>(v1.size()) != n)
            throw std::invalid_argument("arnoldi: v1 length");
        basis.reserve(m + 1);
        basis.push_back(std::move(v1));
    }
};

/// One step of the Arnoldi process with modified Gram-Schmidt: inner
/// products accumulate in binary64, the subtraction runs in working
/// precision. Breakdown (lucky: the solution lies in the current subspace)
/// is declared when the orthogonalized remainder drops below
/// breakdown_tol_factor * roundoff(T) relative to the pre-orthogonalization
/// norm.
template <class T, class Op>
void arnoldi_step(const Op& op, ArnoldiState<T>& state,
                  double breakdown_tol_factor = 1e2) {
    if (state.breakdown)
        throw std::logic_error("arnoldi_step: called after breakdown");
    if (state.steps >= state.m_max)
        throw std::logic_error("arnoldi_step: at capacity");
    const index_t j = state.steps;
    std::vector<T> w = op(std::span<const T>(state.basis[j]));
    if (static_cast<index_t>(w.size()) != state.dim)
        throw std::invalid_argument("arnoldi_step: operator dimension mismatch");
    const double pre_norm = norm2<T>(w);
    for (index_t i = 0; i <= j; ++i) {
        const double h = dot<T>(state.basis[i], w);
        state.hess(i, j) = h;
        const T hc = static_cast<T>(h);
        const auto& vi = state.basis[i];
        for (index_t r = 0; r < state.dim; ++r) w[r] -= hc * vi[r];
    }
    const double hnext = norm2<T>(w);
    state.hess(j + 1, j) = hnext;
    state.steps = j + 1;

    const double roundoff =
        sizeof(T) == sizeof(float) ? kRoundoffSingle : kRoundoffDouble;
    if (hnext <= breakdown_tol_factor * roundoff * pre_norm) {
        state.breakdown = true;
        return;
    }
    const T inv = static_cast<T>(1.0 / hnext);
    for (T& v : w) v *= inv;
    state.basis.push_back(std::move(w));
}

struct HessenbergLsResult {
    std::vector<double> y;
    double residual_norm = 0.0;
    bool rank_deficient = false;
};

/// Minimizes ||beta * e1 - Hbar y||_2 for an upper-Hessenberg Hbar of shape
/// (j+1) x j via progressive Givens rotations, all in binary64. The residual
/// norm is exact (|last rotated rhs entry|). Rank deficiency is handled by
/// the zero-rotation convention and flagged.
HessenbergLsResult solve_hessenberg_ls(const DenseMatrix& hbar, double beta);

struct GmresConfig {
    index_t restart_m = 50;
    double tol = 1e-8;  // on ||r||_2 / ||b||_2 unless absolute_tol
    index_t max_restarts = 40;
    bool absolute_tol = false;
    PrecisionPolicy policy{};
    double breakdown_tol_factor = 1e2;
    bool collect_ritz = false;
};

struct HistoryPoint {
    index_t cycle;
    index_t iteration;  // global iteration number; 0 is the initial residual
    double relative_residual;
};

struct SolveReport {
    bool converged = false;
    index_t total_iterations = 0;
    index_t restarts = 0;  // restart events (cycles executed minus one)
    std::vector<HistoryPoint> residual_history;  // Givens estimates
    std::vector<double> cycle_residuals;  // true relative residual per cycle
    double final_residual = 0.0;          // true relative residual at exit
    bool breakdown = false;
    bool ls_rank_deficient = false;
    double setup_seconds = 0.0;
    double iterate_seconds = 0.0;
    std::vector<std::complex<double>> ritz;
};

struct CycleResult {
    std::vector<double> x;
    index_t iterations = 0;
    std::vector<double> estimates;  // Givens residual estimate after each step
    bool converged_estimate = false;
    bool breakdown = false;
    bool ls_rank_deficient = false;
    DenseMatrix hess;  // (steps+1) x steps, for diagnostics
};

/// One restart cycle of right-preconditioned GMRES. The residual and the
/// solution update run in binary64; the Arnoldi loop runs in the working
/// precision of config.policy.
CycleResult gmres_cycle(const SparseMatrix& a, const Preconditioner& p,
                        std::span<const double> b, std::span<const double> x0,
                        const GmresConfig& config);

struct SolveResult {
    std::vector<double> x;
    SolveReport report;
};

/// Restarted driver: repeats gmres_cycle, recomputing the true residual in
/// binary64 after every cycle, until the tolerance is met or max_restarts
/// cycles have run. Non-convergence returns the best iterate with
/// converged = false.
SolveResult hybrid_restart_gmres(const SparseMatrix& a, const Preconditioner& p,
                                 std::span<const double> b,
                                 const GmresConfig& config);

} // namespace bjgmres
