#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "bjgmres/gmres.hpp"
#include "bjgmres/hessenberg_eig.hpp"
#include "bjgmres/preconditioner.hpp"
#include "bjgmres/spmv.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bjgmres;

namespace {

Partition trivial_partition(index_t n) {
    return partition_from_assignment(std::vector<index_t>(n, 0), 1);
}

/// Dense block-diagonal preconditioner matrix in the original frame,
/// rebuilt from what the preconditioner actually stored.
oracle::DenseM assemble_dense(const Preconditioner& p) {
    const BlockJacobiData* d = p.block_jacobi_data();
    const Partition& part = d->partition;
    const index_t n = part.num_nodes();
    oracle::DenseM permuted = oracle::zeros(n, n);
    for (index_t b = 0; b < part.num_blocks; ++b) {
        const index_t off = part.block_starts[b];
        const oracle::DenseM blk = oracle::to_dense(d->blocks[b]);
        for (size_t i = 0; i < blk.size(); ++i)
            for (size_t j = 0; j < blk.size(); ++j)
                permuted[off + i][off + j] = blk[i][j];
    }
    // Undo the permutation: M[i][j] = permuted[perm[i]][perm[j]].
    oracle::DenseM m = oracle::zeros(n, n);
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j)
            m[i][j] = permuted[part.perm[i]][part.perm[j]];
    return m;
}

double ritz_sample_stddev(const std::vector<std::complex<double>>& vals) {
    std::complex<double> mean(0.0, 0.0);
    for (const auto& v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double acc = 0.0;
    for (const auto& v : vals) acc += std::norm(v - mean);
    return std::sqrt(acc / static_cast<double>(vals.size() - 1));
}

} // namespace

TEST(BlockJacobi, SingleBlockActsAsFullInverse) {
    const SparseMatrix a = fixtures::random_well_conditioned(12, 3);
    const Preconditioner p =
        Preconditioner::block_jacobi(a, trivial_partition(12));
    const std::vector<double> b = fixtures::random_vector(12, 8);
    const std::vector<double> z = p.apply<double>(b);
    const std::vector<double> expect = oracle::solve(oracle::to_dense(a), b);
    for (index_t i = 0; i < 12; ++i)
        EXPECT_NEAR(z[i], expect[i], 1e-11 * std::max(1.0, std::abs(expect[i])));
}

TEST(BlockJacobi, CoupledPairsExampleDropsOffBlockEntries) {
    const SparseMatrix a = fixtures::tridiag4();
    const Partition part = partition_from_assignment({0, 0, 1, 1}, 2);
    const Preconditioner p = Preconditioner::block_jacobi(a, part);
    const oracle::DenseM m = assemble_dense(p);
    // Exact pattern equality with the block-diagonal slice of A: the two
    // 2x2 blocks survive, the (1,2)/(2,1) coupling does not.
    const oracle::DenseM ad = oracle::to_dense(a);
    for (index_t i = 0; i < 4; ++i)
        for (index_t j = 0; j < 4; ++j) {
            const bool same_block = (i < 2) == (j < 2);
            EXPECT_EQ(m[i][j], same_block ? ad[i][j] : 0.0)
                << "entry (" << i << "," << j << ")";
        }
    EXPECT_EQ(m[1][2], 0.0);
    EXPECT_EQ(m[2][1], 0.0);
}

TEST(BlockJacobi, DiagonalMatrixDividesEntrywise) {
    const std::vector<double> d{2.0, 5.0, 0.25, -4.0};
    const SparseMatrix a = fixtures::diag_csr(d);
    const Partition part = partition_from_assignment({0, 0, 1, 1}, 2);
    const Preconditioner p = Preconditioner::block_jacobi(a, part);
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> z = p.apply<double>(v);
    for (index_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(z[i], v[i] / d[i]);
}

TEST(PreconditionerApply, IdentityVariant) {
    const Preconditioner p = Preconditioner::identity(3);
    const std::vector<double> v{1.0, -2.0, 3.0};
    EXPECT_EQ(p.apply<double>(v), v);
}

TEST(PreconditionerApply, SingleBlockUpperTriangular) {
    std::vector<Triplet> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 4.0}};
    const SparseMatrix a = SparseMatrix::from_triplets(t, 2, 2);
    const Preconditioner p = Preconditioner::block_jacobi(a, trivial_partition(2));
    const std::vector<double> z = p.apply<double>(std::vector<double>{5.0, 8.0});
    EXPECT_DOUBLE_EQ(z[0], 1.5);
    EXPECT_DOUBLE_EQ(z[1], 2.0);
}

TEST(PreconditionerApply, TwoBlockDiagonal) {
    const SparseMatrix a = fixtures::diag_csr({2.0, 4.0});
    const Partition part = partition_from_assignment({0, 1}, 2);
    const Preconditioner p = Preconditioner::block_jacobi(a, part);
    const std::vector<double> z = p.apply<double>(std::vector<double>{2.0, 4.0});
    EXPECT_DOUBLE_EQ(z[0], 1.0);
    EXPECT_DOUBLE_EQ(z[1], 1.0);
}

TEST(PreconditionerApply, DimensionMismatch) {
    const Preconditioner p = Preconditioner::identity(3);
    std::vector<double> v{1.0, 2.0};
    std::vector<double> z(3);
    EXPECT_THROW(p.apply<double>(v, z), std::invalid_argument);
}

TEST(PreconditionerApply, SerialAndParallelBitIdentical) {
    const SparseMatrix a = fixtures::laplacian_2d(16, 16);
    const WeightedGraph g = graph_from_matrix(a);
    const Preconditioner p =
        Preconditioner::block_jacobi(a, partition_graph(g, 8, 0.1));
    const std::vector<double> v = fixtures::random_vector(a.rows(), 12);
    std::vector<double> z1(a.rows()), z2(a.rows());
    p.apply<double>(v, z1);
    p.apply_serial<double>(v, z2);
    for (index_t i = 0; i < a.rows(); ++i) ASSERT_EQ(z1[i], z2[i]);
}

TEST(PreconditionerApply, EqualsIndependentPerBlockSolves) {
    const SparseMatrix a = fixtures::random_dd(24, 3, 19);
    const WeightedGraph g = graph_from_matrix(a);
    const Partition part = partition_graph(g, 4, 0.1);
    const Preconditioner p = Preconditioner::block_jacobi(a, part);
    const BlockJacobiData* d = p.block_jacobi_data();
    const std::vector<double> v = fixtures::random_vector(24, 4);

    // Manual route: permute, solve blocks one by one (any order), unpermute.
    std::vector<double> w(24), y(24), expect(24);
    for (index_t i = 0; i < 24; ++i) w[d->partition.perm[i]] = v[i];
    for (index_t b = d->partition.num_blocks - 1; b >= 0; --b) {
        const index_t begin = d->partition.block_starts[b];
        const index_t len = d->partition.block_starts[b + 1] - begin;
        const std::vector<double> rhs(w.begin() + begin, w.begin() + begin + len);
        const std::vector<double> x = lu_solve<double>(d->factors[b], rhs);
        std::copy(x.begin(), x.end(), y.begin() + begin);
    }
    for (index_t i = 0; i < 24; ++i) expect[i] = y[d->partition.perm[i]];

    const std::vector<double> z = p.apply<double>(v);
    for (index_t i = 0; i < 24; ++i) ASSERT_EQ(z[i], expect[i]);
}

TEST(BlockJacobi, SelfConsistencyApplyOfMTimesZ) {
    const SparseMatrix a = fixtures::random_dd(30, 4, 23);
    const WeightedGraph g = graph_from_matrix(a);
    const Preconditioner p =
        Preconditioner::block_jacobi(a, partition_graph(g, 5, 0.1));
    ASSERT_TRUE(p.block_jacobi_data());
    for (const auto& st : p.block_jacobi_data()->stats)
        ASSERT_EQ(st.perturbation_count, 0);
    const oracle::DenseM m = assemble_dense(p);
    const std::vector<double> z = fixtures::random_vector(30, 77);
    const std::vector<double> mz = oracle::matvec(m, z);
    const std::vector<double> back = p.apply<double>(mz);
    for (index_t i = 0; i < 30; ++i)
        EXPECT_NEAR(back[i], z[i], 1e-12 * std::max(1.0, std::abs(z[i])));
}

TEST(BlockJacobi, HybridApplyStaysCloseToDouble) {
    const SparseMatrix a = fixtures::laplacian_2d(10, 10);  // cond ~ 1e2
    const WeightedGraph g = graph_from_matrix(a);
    BlockJacobiOptions opts;
    opts.policy.mode = PrecisionMode::Hybrid;
    const Preconditioner p =
        Preconditioner::block_jacobi(a, partition_graph(g, 4, 0.1), opts);
    const std::vector<double> v = fixtures::random_vector(a.rows(), 31);
    const std::vector<double> zd = p.apply<double>(v);
    const std::vector<float> vf = to_single(v);
    const std::vector<float> zf = p.apply<float>(std::span<const float>(vf));
    const double ref = oracle::norm2(zd);
    double diff = 0.0;
    for (index_t i = 0; i < a.rows(); ++i) {
        const double d = zd[i] - static_cast<double>(zf[i]);
        diff += d * d;
    }
    EXPECT_LE(std::sqrt(diff) / ref, 1e-5);
}

TEST(BlockJacobi, SingularBlockFailsOnlyWithZeroEps) {
    // One diagonal block is exactly singular (zero row within the block).
    std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0},
                           {2, 2, 3.0}, {3, 3, 4.0}};
    const SparseMatrix a = SparseMatrix::from_triplets(t, 4, 4);
    const Partition part = partition_from_assignment({0, 0, 1, 1}, 2);

    BlockJacobiOptions strict;
    strict.eps_pivot = 0.0;
    EXPECT_THROW(Preconditioner::block_jacobi(a, part, strict), SingularBlockError);

    const Preconditioner p = Preconditioner::block_jacobi(a, part);
    const BlockJacobiData* d = p.block_jacobi_data();
    EXPECT_EQ(d->stats[0].perturbation_count, 1);
    EXPECT_EQ(d->stats[1].perturbation_count, 0);
}

TEST(ApplyNeumann, DiagonalPhiTruncatesExactly) {
    const std::vector<double> dvals{2.0, 4.0, 8.0};
    const SparseMatrix a = fixtures::diag_csr(dvals);
    BlockJacobiOptions opts;
    opts.neumann_order = 3;
    const Partition part = partition_from_assignment({0, 1, 2}, 3);
    const Preconditioner p = Preconditioner::block_jacobi(a, part, opts);
    const std::vector<double> v{1.0, 1.0, 1.0};
    for (int k = 0; k <= 3; ++k) {
        const std::vector<double> z = p.apply_neumann<double>(a, v, k);
        for (index_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(z[i], v[i] / dvals[i]);
    }
}

TEST(ApplyNeumann, OrderZeroEqualsApply) {
    const SparseMatrix a = fixtures::random_dd(12, 3, 41);
    const WeightedGraph g = graph_from_matrix(a);
    BlockJacobiOptions opts;
    opts.neumann_order = 2;
    const Preconditioner p =
        Preconditioner::block_jacobi(a, partition_graph(g, 3, 0.1), opts);
    const std::vector<double> v = fixtures::random_vector(12, 5);
    EXPECT_EQ(p.apply_neumann<double>(a, v, 0), p.apply<double>(v));
}

TEST(ApplyNeumann, FirstOrderSeriesExample) {
    std::vector<Triplet> t{{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}};
    const SparseMatrix a = SparseMatrix::from_triplets(t, 2, 2);
    BlockJacobiOptions opts;
    opts.neumann_order = 1;
    const Partition part = partition_from_assignment({0, 1}, 2);  // Phi = diag(2,2)
    const Preconditioner p = Preconditioner::block_jacobi(a, part, opts);
    const std::vector<double> z =
        p.apply_neumann<double>(a, std::vector<double>{1.0, 0.0}, 1);
    EXPECT_DOUBLE_EQ(z[0], 0.5);
    EXPECT_DOUBLE_EQ(z[1], -0.25);
}

TEST(ApplyNeumann, MissingDataErrors) {
    const Preconditioner ident = Preconditioner::identity(2);
    const SparseMatrix a = fixtures::identity_csr(2);
    const std::vector<double> v{1.0, 2.0};
    EXPECT_THROW(ident.apply_neumann<double>(a, v, 1), std::logic_error);

    const Preconditioner p = Preconditioner::block_jacobi(a, trivial_partition(2));
    EXPECT_THROW(p.apply_neumann<double>(a, v, 1), std::invalid_argument);
}

TEST(BlockErrorBound, FormulaValues) {
    EXPECT_NEAR(block_error_bound(1.0, 0x1p-24, 0x1p-53), 0x1p-53 + 0x1p-24,
                1e-24);
    EXPECT_NEAR(block_error_bound(1e8, 0.0, 0x1p-53), 1e16 * 0x1p-53, 1e-4);
    EXPECT_DOUBLE_EQ(block_error_bound(123.0, 0.0, 0.0), 0.0);
}

TEST(CondEstimate, IdentityIsOne) {
    const SparseMatrix a = fixtures::identity_csr(6);
    const LUFactors f = gp_lu(a, 1e-10);
    EXPECT_DOUBLE_EQ(cond_estimate_block(f, a), 1.0);
}

TEST(CondEstimate, DiagonalCondIsRatio) {
    const SparseMatrix a = fixtures::diag_csr({1.0, 1000.0});
    const LUFactors f = gp_lu(a, 1e-10);
    EXPECT_DOUBLE_EQ(cond_estimate_block(f, a), 1000.0);
}

TEST(CondEstimate, WithinTenfoldOfDenseOracle) {
    // Dims <= 64 take the exact dense path; 80 exercises the Hager estimate.
    for (index_t n : {10, 80}) {
        const SparseMatrix a = fixtures::random_well_conditioned(n, 57);
        const LUFactors f = gp_lu(a, 0.0);
        const double est = cond_estimate_block(f, a);
        const double exact = oracle::cond1(oracle::to_dense(a));
        EXPECT_LE(est, exact * 1.0001) << n;  // estimator is a lower bound
        EXPECT_GE(est * 10.0, exact) << n;
    }
}

TEST(Ilu0Preconditioner, AppliesForwardBackSolve) {
    const SparseMatrix a = fixtures::laplacian_2d(4, 4);
    const Preconditioner p = Preconditioner::from_ilu0(a);
    ASSERT_TRUE(p.ilu_factors());
    const std::vector<double> v = fixtures::random_vector(16, 3);
    const std::vector<double> z = p.apply<double>(v);
    const std::vector<double> expect = lu_solve<double>(*p.ilu_factors(), v);
    for (index_t i = 0; i < 16; ++i) ASSERT_EQ(z[i], expect[i]);
}

TEST(SpectralClustering, PreconditioningTightensRitzSpread) {
    const SparseMatrix a = fixtures::laplacian_2d(32, 32);
    const index_t n = a.rows();
    const WeightedGraph g = graph_from_matrix(a);
    const Preconditioner bj =
        Preconditioner::block_jacobi(a, partition_graph(g, 16, 0.1));
    const Preconditioner ident = Preconditioner::identity(n);

    const auto ritz_of = [&](const Preconditioner& p) {
        std::vector<double> v1 = fixtures::ones(n);
        const double nrm = oracle::norm2(v1);
        for (double& x : v1) x /= nrm;
        ArnoldiState<double> st(n, 20, v1);
        const auto op = [&](std::span<const double> v) {
            return spmv<double>(a, std::span<const double>(p.apply<double>(v)));
        };
        while (st.steps < 20 && !st.breakdown) arnoldi_step(op, st);
        DenseMatrix h(st.steps, st.steps);
        for (index_t j = 0; j < st.steps; ++j)
            for (index_t i = 0; i < st.steps; ++i) h(i, j) = st.hess(i, j);
        return ritz_values(h);
    };

    const double spread_pre = ritz_sample_stddev(ritz_of(bj));
    const double spread_plain = ritz_sample_stddev(ritz_of(ident));
    EXPECT_LT(spread_pre, spread_plain);
}
