#pragma once

// Shared test fixtures: small structured matrices and seeded random systems.

#include <vector>

#include "bjgmres/sparse_matrix.hpp"
#include "oracles.hpp"

namespace fixtures {

using bjgmres::index_t;
using bjgmres::SparseMatrix;
using bjgmres::Triplet;

inline SparseMatrix identity_csr(index_t n) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix::from_triplets(t, n, n);
}

inline SparseMatrix diag_csr(const std::vector<double>& d) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < static_cast<index_t>(d.size()); ++i)
        t.push_back({i, i, d[i]});
    return SparseMatrix::from_triplets(t, d.size(), d.size());
}

inline SparseMatrix tridiag(index_t n, double lo, double di, double up) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, lo});
        t.push_back({i, i, di});
        if (i + 1 < n) t.push_back({i, i + 1, up});
    }
    return SparseMatrix::from_triplets(t, n, n);
}

/// The 4x4 coupled-pairs example: tridiagonal, uniform couplings, so its
/// graph is a path with unit edge weights.
inline SparseMatrix tridiag4() { return tridiag(4, -1.0, 2.0, -1.0); }

/// 5-point Laplacian on an nx-by-ny grid (SPD).
inline SparseMatrix laplacian_2d(index_t nx, index_t ny) {
    const auto id = [nx](index_t ix, index_t iy) { return iy * nx + ix; };
    std::vector<Triplet> t;
    for (index_t iy = 0; iy < ny; ++iy) {
        for (index_t ix = 0; ix < nx; ++ix) {
            const index_t c = id(ix, iy);
            t.push_back({c, c, 4.0});
            if (ix > 0) t.push_back({c, id(ix - 1, iy), -1.0});
            if (ix + 1 < nx) t.push_back({c, id(ix + 1, iy), -1.0});
            if (iy > 0) t.push_back({c, id(ix, iy - 1), -1.0});
            if (iy + 1 < ny) t.push_back({c, id(ix, iy + 1), -1.0});
        }
    }
    return SparseMatrix::from_triplets(t, nx * ny, nx * ny);
}

/// Upwind convection-diffusion on an nx-by-ny grid (nonsymmetric for
/// vx, vy > 0).
inline SparseMatrix convection_diffusion_2d(index_t nx, index_t ny, double vx,
                                            double vy) {
    const auto id = [nx](index_t ix, index_t iy) { return iy * nx + ix; };
    std::vector<Triplet> t;
    for (index_t iy = 0; iy < ny; ++iy) {
        for (index_t ix = 0; ix < nx; ++ix) {
            const index_t c = id(ix, iy);
            t.push_back({c, c, 4.0 + vx + vy});
            if (ix > 0) t.push_back({c, id(ix - 1, iy), -1.0 - vx});
            if (ix + 1 < nx) t.push_back({c, id(ix + 1, iy), -1.0});
            if (iy > 0) t.push_back({c, id(ix, iy - 1), -1.0 - vy});
            if (iy + 1 < ny) t.push_back({c, id(ix, iy + 1), -1.0});
        }
    }
    return SparseMatrix::from_triplets(t, nx * ny, nx * ny);
}

/// Random sparse diagonally dominant matrix (well conditioned, nonsymmetric
/// pattern), deterministic per seed.
inline SparseMatrix random_dd(index_t n, index_t extra_per_row,
                              std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::vector<Triplet> t;
    std::vector<double> row_abs(n, 0.0);
    for (index_t i = 0; i < n; ++i) {
        for (index_t k = 0; k < extra_per_row; ++k) {
            const index_t j = static_cast<index_t>(rng.next_below(n));
            if (j == i) continue;
            const double v = rng.uniform_pm1();
            t.push_back({i, j, v});
            row_abs[i] += std::abs(v);
        }
    }
    for (index_t i = 0; i < n; ++i)
        t.push_back({i, i, row_abs[i] + 1.0 + 0.5 * std::abs(rng.uniform_pm1())});
    return SparseMatrix::from_triplets(t, n, n);
}

/// Random dense-pattern matrix with entries in [-1, 1].
inline SparseMatrix random_dense_pattern(index_t n, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) t.push_back({i, j, rng.uniform_pm1()});
    return SparseMatrix::from_triplets(t, n, n);
}

/// Random dense-pattern, made well conditioned by diagonal boosting.
inline SparseMatrix random_well_conditioned(index_t n, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) {
            double v = rng.uniform_pm1();
            if (i == j) v += static_cast<double>(n);
            t.push_back({i, j, v});
        }
    return SparseMatrix::from_triplets(t, n, n);
}

inline std::vector<double> ones(index_t n) { return std::vector<double>(n, 1.0); }

inline std::vector<double> random_vector(index_t n, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform_pm1();
    return v;
}

} // namespace fixtures
