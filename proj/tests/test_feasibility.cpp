#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace cmx;

namespace {

CovBand scalar_band(std::initializer_list<double> values)
{
    std::vector<Matrix> blocks;
    for (double v : values) {
        blocks.push_back(Matrix::Constant(1, 1, v));
    }
    return CovBand(std::move(blocks));
}

Matrix lag_of(const std::vector<Matrix>& lags, int k)
{
    return k >= 0 ? lags[static_cast<std::size_t>(k)] : Matrix(lags[static_cast<std::size_t>(-k)].transpose());
}

} // namespace

TEST(Levinson, CoefficientsSolveTheNormalEquations)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 3);
        const int n = oracle::uniform_int(rng, 1, 4);
        const auto inst = oracle::random_feasible(rng, m, n, 2 * n + 3);
        const LevinsonResult lev = block_levinson(inst.band);
        const auto& s = inst.band.sigma;

        // Dense route: [A_1 .. A_n] T_{n-1} = -[Sigma_1 .. Sigma_n] with block (i, j) of T_{n-1} = Sigma_{j-i}.
        Matrix t(n * m, n * m);
        Matrix rhs(m, n * m);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                t.block(i * m, j * m, m, m) = lag_of(s, j - i);
            }
            rhs.block(0, i * m, m, m) = -s[static_cast<std::size_t>(i + 1)];
        }
        const Matrix a = t.transpose().lu().solve(rhs.transpose()).transpose();
        Matrix innovation = s[0];
        for (int j = 1; j <= n; ++j) {
            EXPECT_LE((lev.ar_coeffs[static_cast<std::size_t>(j - 1)] - a.block(0, (j - 1) * m, m, m)).norm(),
                      1e-9 * (1.0 + a.norm()));
            innovation += a.block(0, (j - 1) * m, m, m) * s[static_cast<std::size_t>(j)].transpose();
        }
        EXPECT_LE((lev.innovation - innovation).norm(), 1e-9 * (1.0 + innovation.norm()));
    }
}

TEST(Levinson, RejectsBandWithoutPositiveToeplitz)
{
    try {
        block_levinson(scalar_band({1.0, 0.9, 0.2}));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::infeasible_band);
    }
    EXPECT_THROW(block_levinson(scalar_band({-1.0})), error);
}

TEST(Levinson, ExtensionHasBandedToeplitzInverse)
{
    // The autoregressive extension is the maximum-entropy Toeplitz extension:
    // the inverse of any larger section is block banded with bandwidth n.
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 2);
        const int n = oracle::uniform_int(rng, 1, 3);
        const auto inst = oracle::random_feasible(rng, m, n, 2 * n + 3);
        const LevinsonResult lev = block_levinson(inst.band);
        std::vector<Matrix> lags(inst.band.sigma);
        const auto extra = ar_extend(lev, inst.band, 6);
        lags.insert(lags.end(), extra.begin(), extra.end());
        const int order = static_cast<int>(lags.size()) - 1;
        const Matrix t = toeplitz(CovBand(lags));
        ASSERT_GT(oracle::dense_min_eigenvalue(t), 0.0);
        const Matrix inv = t.inverse();
        double off = 0.0;
        for (int i = 0; i <= order; ++i) {
            for (int j = 0; j <= order; ++j) {
                if (std::abs(i - j) > n) {
                    off = std::max(off, inv.block(i * m, j * m, m, m).norm());
                }
            }
        }
        EXPECT_LE(off, 1e-8 * inv.norm());
    }
}

TEST(Wrap, OddAndEvenLayouts)
{
    std::vector<Matrix> lags{Matrix::Constant(1, 1, 4.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5),
                             Matrix::Constant(1, 1, 0.25)};
    const BlockCirculant odd = wrap_lags(lags, 5);
    EXPECT_EQ(odd.block(1)(0, 0), 1.0);
    EXPECT_EQ(odd.block(4)(0, 0), 1.0);
    EXPECT_EQ(odd.block(2)(0, 0), 0.5);
    EXPECT_EQ(odd.block(3)(0, 0), 0.5);
    const BlockCirculant even = wrap_lags(lags, 6);
    EXPECT_EQ(even.block(3)(0, 0), 0.5);
    EXPECT_EQ(even.block(2)(0, 0), 0.5);
    EXPECT_EQ(even.block(4)(0, 0), 0.5);
    EXPECT_TRUE(even.is_symmetric());
    EXPECT_THROW(wrap_lags(lags, 8), error);
}

TEST(FeasibleN, WhiteBandIsFeasibleAtTheMinimumPeriod)
{
    for (int n = 0; n <= 3; ++n) {
        std::vector<Matrix> blocks(static_cast<std::size_t>(n + 1), Matrix::Zero(2, 2));
        blocks[0] = Matrix::Identity(2, 2);
        EXPECT_EQ(find_feasible_N(CovBand(blocks)).N, 2 * n + 1);
    }
}

TEST(FeasibleN, ResultIsPositiveAndPredecessorFailsByDenseScan)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 2);
        const int n = oracle::uniform_int(rng, 1, 3);
        const auto inst = oracle::random_feasible(rng, m, n, oracle::uniform_int(rng, 2 * n + 1, 4 * n + 4), 1e-3);
        const FeasibleExtension ext = find_feasible_N(inst.band);
        EXPECT_GT(oracle::dense_min_eigenvalue(oracle::dense(ext.wrap)), 0.0);
        for (int k = 0; k <= n; ++k) {
            EXPECT_EQ(ext.wrap.block(k), inst.band.sigma[static_cast<std::size_t>(k)]);
        }
        for (const WrapTrace& w : ext.trace) {
            const LevinsonResult lev = block_levinson(inst.band);
            const double dense_min = oracle::dense_min_eigenvalue(oracle::dense(wrap_ar_extension(inst.band, lev, w.N)));
            EXPECT_NEAR(w.min_eigenvalue, dense_min, 1e-9 * (1.0 + std::abs(dense_min)));
            if (w.N < ext.N) {
                EXPECT_FALSE(w.positive_definite);
            }
        }
    }
}

TEST(FeasibleN, NearSingularBandNeedsALongerPeriod)
{
    // Lags of a sinusoid plus a little white noise: T_n is barely positive.
    const double omega = 0.9;
    const double eps = 1e-2;
    const int n = 3;
    std::vector<Matrix> blocks;
    for (int k = 0; k <= n; ++k) {
        blocks.push_back(Matrix::Constant(1, 1, std::cos(omega * k) + (k == 0 ? eps : 0.0)));
    }
    const CovBand band(blocks);
    const FeasibleExtension ext = find_feasible_N(band, 400);
    EXPECT_GT(ext.N, 2 * n + 1);
    EXPECT_GT(oracle::dense_min_eigenvalue(oracle::dense(ext.wrap)), 0.0);
    EXPECT_EQ(ext.trace.size(), static_cast<std::size_t>(ext.N - 2 * n));
}

TEST(FeasibleN, HorizonExhaustionCarriesTheScan)
{
    const double omega = 0.9;
    std::vector<Matrix> blocks;
    for (int k = 0; k <= 3; ++k) {
        blocks.push_back(Matrix::Constant(1, 1, std::cos(omega * k) + (k == 0 ? 1e-6 : 0.0)));
    }
    try {
        find_feasible_N(CovBand(blocks), 8);
        FAIL() << "expected horizon exhaustion";
    } catch (const horizon_exhausted_error& e) {
        EXPECT_EQ(e.code(), errc::horizon_exhausted);
        EXPECT_EQ(e.trace().size(), 2u);
    }
    EXPECT_THROW(find_feasible_N(scalar_band({1.0, 0.5}), 2), error);
}

TEST(FeasibleN, NonPositiveBandIsInfeasible)
{
    try {
        find_feasible_N(scalar_band({1.0, 1.2}));
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::infeasible_band);
    }
}
