#include "bjgmres/gmres.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bjgmres/hessenberg_eig.hpp"
#include "bjgmres/spmv.hpp"

namespace bjgmres {

namespace {

/// Progressive Givens reduction of the Hessenberg least-squares problem.
/// After each column the minimal residual norm is |g[cols]| for free.
class GivensLs {
public:
    GivensLs(index_t max_cols, double beta)
        : r_(max_cols + 1, max_cols), cs_(max_cols), sn_(max_cols),
          g_(max_cols + 1, 0.0) {
        g_[0] = beta;
    }

    /// col holds entries 0..j+1 of Hessenberg column j. Returns the updated
    /// residual estimate.
    double push_column(std::span<const double> col) {
        const index_t j = cols_;
        for (index_t i = 0; i <= j + 1; ++i) r_(i, j) = col[i];
        for (index_t i = 0; i < j; ++i) {
            const double t = cs_[i] * r_(i, j) + sn_[i] * r_(i + 1, j);
            r_(i + 1, j) = -sn_[i] * r_(i, j) + cs_[i] * r_(i + 1, j);
            r_(i, j) = t;
        }
        const double a = r_(j, j);
        const double b = r_(j + 1, j);
        if (b == 0.0) {
            cs_[j] = 1.0;
            sn_[j] = 0.0;
        } else {
            const double h = std::hypot(a, b);
            cs_[j] = a / h;
            sn_[j] = b / h;
        }
        r_(j, j) = cs_[j] * a + sn_[j] * b;
        r_(j + 1, j) = 0.0;
        if (r_(j, j) == 0.0) rank_deficient_ = true;
        const double t = cs_[j] * g_[j] + sn_[j] * g_[j + 1];
        g_[j + 1] = -sn_[j] * g_[j] + cs_[j] * g_[j + 1];
        g_[j] = t;
        ++cols_;
        return std::abs(g_[cols_]);
    }

    double residual() const { return std::abs(g_[cols_]); }
    bool rank_deficient() const { return rank_deficient_; }

    std::vector<double> solve_y() const {
        std::vector<double> y(cols_, 0.0);
        for (index_t i = cols_ - 1; i >= 0; --i) {
            if (r_(i, i) == 0.0) continue;  // zero-rotation convention
            double s = g_[i];
            for (index_t k = i + 1; k < cols_; ++k) s -= r_(i, k) * y[k];
            y[i] = s / r_(i, i);
        }
        return y;
    }

private:
    DenseMatrix r_;
    std::vector<double> cs_, sn_, g_;
    index_t cols_ = 0;
    bool rank_deficient_ = false;
};

std::vector<double> residual_vector(const SparseMatrix& a,
                                    std::span<const double> b,
                                    std::span<const double> x) {
    std::vector<double> r = spmv<double>(a, x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return r;
}

template <class T>
std::vector<T> cast_from_double(std::span<const double> x) {
    std::vector<T> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = static_cast<T>(x[i]);
    return y;
}

template <class T>
std::vector<T> preconditioned(const Preconditioner& p, const SparseMatrix& a,
                              std::span<const T> v) {
    if (p.neumann_order() > 0) return p.apply_neumann<T>(a, v, p.neumann_order());
    return p.apply<T>(v);
}

template <class T>
CycleResult run_cycle(const SparseMatrix& a, const Preconditioner& p,
                      std::span<const double> b, std::span<const double> x0,
                      const GmresConfig& cfg) {
    const index_t n = a.rows();
    CycleResult res;
    res.x.assign(x0.begin(), x0.end());

    const double bnorm = norm2<double>(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged_estimate = true;
        return res;
    }
    const double thr = cfg.absolute_tol ? cfg.tol : cfg.tol * bnorm;

    const std::vector<double> r0 = residual_vector(a, b, x0);
    const double beta = norm2<double>(r0);
    if (beta <= thr) {
        res.converged_estimate = true;
        return res;
    }

    std::vector<double> v1d(r0);
    for (double& v : v1d) v /= beta;
    ArnoldiState<T> st(n, cfg.restart_m, cast_from_double<T>(v1d));
    GivensLs ls(cfg.restart_m, beta);

    const auto op = [&](std::span<const T> v) {
        const std::vector<T> z = preconditioned<T>(p, a, v);
        return spmv<T>(a, std::span<const T>(z));
    };

    // A cycle cannot push the true residual much below the working-precision
    // roundoff of its own starting residual; once the estimate reaches that
    // floor, restarting in binary64 is the productive move.
    const double roundoff = cfg.policy.working_roundoff();
    const double attainable = 10.0 * roundoff * beta;

    std::vector<double> col(cfg.restart_m + 1);
    while (st.steps < cfg.restart_m) {
        arnoldi_step(op, st, cfg.breakdown_tol_factor);
        const index_t j = st.steps - 1;
        for (index_t i = 0; i <= j + 1; ++i) col[i] = st.hess(i, j);
        const double est = ls.push_column(std::span<const double>(col.data(), j + 2));
        res.estimates.push_back(est);
        if (est <= thr) res.converged_estimate = true;
        if (st.breakdown) res.breakdown = true;
        if (res.converged_estimate || res.breakdown || est <= attainable) break;
    }
    res.iterations = st.steps;
    res.ls_rank_deficient = ls.rank_deficient();

    // x = x0 + M^-1 V y, applications and update in binary64.
    const std::vector<double> y = ls.solve_y();
    std::vector<double> u(n, 0.0);
    for (index_t i = 0; i < st.steps; ++i) {
        const auto& vi = st.basis[i];
        const double yi = y[i];
        for (index_t r = 0; r < n; ++r) u[r] += yi * static_cast<double>(vi[r]);
    }
    const std::vector<double> z = preconditioned<double>(p, a, u);
    for (index_t r = 0; r < n; ++r) res.x[r] = x0[r] + z[r];

    res.hess = DenseMatrix(st.steps + 1, st.steps);
    for (index_t j = 0; j < st.steps; ++j)
        for (index_t i = 0; i <= std::min(j + 1, st.steps); ++i)
            res.hess(i, j) = st.hess(i, j);
    return res;
}

} // namespace

HessenbergLsResult solve_hessenberg_ls(const DenseMatrix& hbar, double beta) {
    if (hbar.rows != hbar.cols + 1)
        throw std::invalid_argument("solve_hessenberg_ls: need (j+1) x j input");
    if (beta < 0.0) throw std::invalid_argument("solve_hessenberg_ls: beta < 0");
    GivensLs ls(hbar.cols, beta);
    std::vector<double> col(hbar.cols + 1);
    for (index_t j = 0; j < hbar.cols; ++j) {
        for (index_t i = 0; i <= j + 1; ++i) col[i] = hbar(i, j);
        ls.push_column(std::span<const double>(col.data(), j + 2));
    }
    HessenbergLsResult out;
    out.y = ls.solve_y();
    out.residual_norm = ls.residual();
    out.rank_deficient = ls.rank_deficient();
    return out;
}

CycleResult gmres_cycle(const SparseMatrix& a, const Preconditioner& p,
                        std::span<const double> b, std::span<const double> x0,
                        const GmresConfig& config) {
    if (a.rows() != a.cols()) throw std::invalid_argument("gmres: matrix must be square");
    if (static_cast<index_t>(b.size()) != a.rows() ||
        static_cast<index_t>(x0.size()) != a.rows())
        throw std::invalid_argument("gmres: dimension mismatch");
    if (config.restart_m < 1 || config.tol <= 0.0)
        throw std::invalid_argument("gmres: invalid config");
    if (config.policy.hybrid()) return run_cycle<float>(a, p, b, x0, config);
    return run_cycle<double>(a, p, b, x0, config);
}

SolveResult hybrid_restart_gmres(const SparseMatrix& a, const Preconditioner& p,
                                 std::span<const double> b,
                                 const GmresConfig& config) {
    if (a.rows() != a.cols()) throw std::invalid_argument("gmres: matrix must be square");
    if (static_cast<index_t>(b.size()) != a.rows())
        throw std::invalid_argument("gmres: rhs dimension mismatch");
    if (config.restart_m < 1 || config.tol <= 0.0 || config.max_restarts < 1)
        throw std::invalid_argument("gmres: invalid config");

    const auto t_start = std::chrono::steady_clock::now();
    const index_t n = a.rows();
    SolveResult out;
    out.x.assign(n, 0.0);
    SolveReport& rep = out.report;

    const double bnorm = norm2<double>(b);
    if (bnorm == 0.0) {
        rep.converged = true;
        rep.residual_history.push_back({0, 0, 0.0});
        return out;
    }
    const double thr = config.absolute_tol ? config.tol : config.tol * bnorm;

    std::vector<double> r = residual_vector(a, b, out.x);
    double rnorm = norm2<double>(r);
    rep.residual_history.push_back({0, 0, rnorm / bnorm});
    rep.final_residual = rnorm / bnorm;
    if (rnorm <= thr) {
        rep.converged = true;
        return out;
    }

    GmresConfig cycle_cfg = config;
    index_t cycles = 0;
    index_t global_iter = 0;
    DenseMatrix last_hess;
    for (index_t cycle = 0; cycle < config.max_restarts; ++cycle) {
        CycleResult cres = gmres_cycle(a, p, b, out.x, cycle_cfg);
        ++cycles;
        for (double est : cres.estimates)
            rep.residual_history.push_back({cycle, ++global_iter, est / bnorm});
        rep.total_iterations += cres.iterations;
        rep.breakdown = rep.breakdown || cres.breakdown;
        rep.ls_rank_deficient = rep.ls_rank_deficient || cres.ls_rank_deficient;
        out.x = std::move(cres.x);
        if (cres.hess.cols > 0) last_hess = std::move(cres.hess);

        // Never trust the Givens estimate across a restart boundary.
        r = residual_vector(a, b, out.x);
        rnorm = norm2<double>(r);
        rep.cycle_residuals.push_back(rnorm / bnorm);
        if (rnorm <= thr) {
            rep.converged = true;
            break;
        }
        if (cres.iterations == 0) break;  // no progress is possible
    }
    rep.restarts = cycles > 0 ? cycles - 1 : 0;
    rep.final_residual = rnorm / bnorm;

    if (config.collect_ritz && last_hess.cols > 0) {
        DenseMatrix h(last_hess.cols, last_hess.cols);
        for (index_t j = 0; j < h.cols; ++j)
            for (index_t i = 0; i < h.rows; ++i) h(i, j) = last_hess(i, j);
        try {
            rep.ritz = ritz_values(h);
        } catch (const std::exception&) {
            // diagnostics only; never block the solve
        }
    }
    rep.iterate_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return out;
}

} // namespace bjgmres
