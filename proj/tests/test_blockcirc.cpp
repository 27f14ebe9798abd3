#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace cmx;

namespace {

BlockCirculant random_circulant(std::mt19937_64& rng, int m, int N)
{
    std::vector<Matrix> col;
    for (int k = 0; k < N; ++k) {
        col.push_back(oracle::random_matrix(rng, m, m));
    }
    return BlockCirculant(std::move(col));
}

BlockCirculant random_spd(std::mt19937_64& rng, int m, int N)
{
    return oracle::random_feasible(rng, m, 0, N).generator;
}

double max_block_diff(const BlockCirculant& a, const BlockCirculant& b)
{
    double worst = 0.0;
    for (int k = 0; k < a.N(); ++k) {
        worst = std::max(worst, (a.block(k) - b.block(k)).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace

TEST(BlockCirculant, DenseLayoutPutsLagIMinusJInBlockIJ)
{
    std::mt19937_64 rng(1);
    const BlockCirculant c = random_circulant(rng, 2, 5);
    EXPECT_EQ((c.to_dense() - oracle::dense(c)).norm(), 0.0);
    EXPECT_EQ(c.block(-1), c.block(4));
}

TEST(BlockCirculant, DftRoundTripOnRandomCirculants)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 120; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 4);
        const int N = oracle::uniform_int(rng, 1, 33);
        const BlockCirculant c = random_circulant(rng, m, N);
        const BlockCirculant back = idft_reconstruct(dft_block_diagonalize(c));
        EXPECT_LE(max_block_diff(c, back), 1e-12) << "m=" << m << " N=" << N;
    }
}

TEST(BlockCirculant, SpectralBlocksAreHermitianWithConjugateMirror)
{
    std::mt19937_64 rng(3);
    const BlockCirculant c = random_spd(rng, 3, 10);
    const SpectralForm s = dft_block_diagonalize(c);
    for (int l = 0; l < 10; ++l) {
        EXPECT_LE((s.psi[l] - s.psi[l].adjoint()).norm(), 1e-12);
        EXPECT_LE((s.psi[(10 - l) % 10] - s.psi[l].conjugate()).norm(), 1e-12);
    }
}

TEST(BlockCirculant, FrequencyEigenvaluesMatchDenseSpectrum)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 3);
        const int N = oracle::uniform_int(rng, 2, 12);
        const BlockCirculant c = random_spd(rng, m, N);
        const auto eig = detail::frequency_eigenvalues(dft_block_diagonalize(c));
        std::vector<double> fast;
        for (const auto& v : eig) {
            fast.insert(fast.end(), v.data(), v.data() + v.size());
        }
        std::sort(fast.begin(), fast.end());
        const Vector ref = Eigen::SelfAdjointEigenSolver<Matrix>(oracle::dense(c)).eigenvalues();
        ASSERT_EQ(static_cast<Eigen::Index>(fast.size()), ref.size());
        for (Eigen::Index i = 0; i < ref.size(); ++i) {
            EXPECT_NEAR(fast[static_cast<std::size_t>(i)], ref(i), 1e-10 * (1.0 + std::abs(ref(i))));
        }
    }
}

TEST(BlockCirculant, LogdetMatchesDenseCholesky)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 3);
        const int N = oracle::uniform_int(rng, 1, 20);
        const BlockCirculant c = random_spd(rng, m, N);
        EXPECT_NEAR(logdet(c), oracle::dense_logdet(oracle::dense(c)), 1e-9);
    }
}

TEST(BlockCirculant, InverseMatchesDenseInverse)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = oracle::uniform_int(rng, 1, 3);
        const int N = oracle::uniform_int(rng, 1, 16);
        const BlockCirculant c = random_spd(rng, m, N);
        const Matrix ref = oracle::dense(c).inverse();
        EXPECT_LE((oracle::dense(inverse(c)) - ref).norm(), 1e-9 * ref.norm());
    }
}

TEST(BlockCirculant, MultiplyTransposeAndInnerMatchDense)
{
    std::mt19937_64 rng(7);
    const BlockCirculant a = random_circulant(rng, 2, 7);
    const BlockCirculant b = random_circulant(rng, 2, 7);
    const Matrix da = oracle::dense(a);
    const Matrix db = oracle::dense(b);
    EXPECT_LE((oracle::dense(multiply(a, b)) - da * db).norm(), 1e-12 * da.norm() * db.norm());
    EXPECT_LE((oracle::dense(transpose(a)) - da.transpose()).norm(), 1e-14);
    EXPECT_NEAR(inner(a, b), (da.transpose() * db).trace(), 1e-10);
    EXPECT_NEAR(frobenius_norm(a), da.norm(), 1e-12);
    EXPECT_LE((oracle::dense(a + b) - (da + db)).norm(), 1e-14);
    EXPECT_LE((oracle::dense(a - 2.0 * b) - (da - 2.0 * db)).norm(), 1e-13);
}

TEST(BandedCirculant, InnerProductAgreesWithAssembledForm)
{
    std::mt19937_64 rng(8);
    std::vector<Matrix> x;
    std::vector<Matrix> y;
    for (int k = 0; k <= 2; ++k) {
        x.push_back(oracle::random_matrix(rng, 2, 2));
        y.push_back(oracle::random_matrix(rng, 2, 2));
    }
    x[0] = detail::symmetrized(x[0]);
    y[0] = detail::symmetrized(y[0]);
    const BandedCirculant bx(9, x);
    const BandedCirculant by(9, y);
    EXPECT_NEAR(inner(bx, by), inner(bx.assemble(), by.assemble()), 1e-11);
    EXPECT_NEAR(bx.frobenius_norm(), frobenius_norm(bx.assemble()), 1e-12);
    const BlockCirculant assembled = bx.assemble();
    EXPECT_TRUE(assembled.is_symmetric());
    EXPECT_EQ(assembled.block(7), x[2].transpose());
    EXPECT_EQ(assembled.block(4), Matrix::Zero(2, 2));
}

TEST(BandedCirculant, AssembleRejectsShortPeriod)
{
    const BandedCirculant b(4, std::vector<Matrix>(3, Matrix::Identity(1, 1)));
    try {
        b.assemble();
        FAIL() << "expected a dimension error";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::dimension);
    }
}

TEST(BlockCirculant, ProjectionRecoversCirculantAndAveragesDiagonals)
{
    std::mt19937_64 rng(9);
    const BlockCirculant c = random_circulant(rng, 2, 6);
    EXPECT_LE(max_block_diff(project_circulant(oracle::dense(c), 2), c), 1e-14);

    Matrix d = Matrix::Zero(3, 3);
    d(1, 0) = 3.0;
    const BlockCirculant p = project_circulant(d, 1);
    EXPECT_DOUBLE_EQ(p.block(1)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.block(0)(0, 0), 0.0);
}

TEST(BlockCirculant, BandResidualAndBandOf)
{
    std::mt19937_64 rng(10);
    std::vector<Matrix> blocks{Matrix::Identity(2, 2) * 3.0, oracle::random_matrix(rng, 2, 2)};
    const BlockCirculant banded = BandedCirculant(8, blocks).assemble();
    EXPECT_EQ(band_residual(banded, 1), 0.0);
    EXPECT_GT(band_residual(banded, 0), 0.0);
    EXPECT_EQ(band_of(banded, 1).sigma[1], blocks[1]);
    EXPECT_THROW(band_residual(banded, 4), error);
}

TEST(BlockCirculant, ToeplitzLayout)
{
    const CovBand band({Matrix::Identity(2, 2), (Matrix(2, 2) << 0.1, 0.2, 0.3, 0.4).finished()});
    const Matrix t = toeplitz(band);
    EXPECT_EQ(t.block(2, 0, 2, 2), band.sigma[1]);
    EXPECT_EQ(t.block(0, 2, 2, 2), band.sigma[1].transpose());
    EXPECT_TRUE(is_strictly_positive(band));
    EXPECT_FALSE(is_strictly_positive(CovBand({Matrix::Identity(1, 1), Matrix::Constant(1, 1, 1.0)})));
}

TEST(BlockCirculant, PositiveDefinitenessAndErrors)
{
    const BlockCirculant id = BlockCirculant::identity(2, 5);
    EXPECT_TRUE(is_positive_definite(id));
    EXPECT_NEAR(logdet(id), 0.0, 1e-15);
    EXPECT_NEAR(logdet(BlockCirculant::scaled_identity(2, 5, 2.0)), 10.0 * std::log(2.0), 1e-12);

    // Circ{1, -1, 0, -1}: eigenvalues 1 - 2 cos(2 pi l / 4) include -1.
    const BlockCirculant indefinite({Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -1.0),
                                     Matrix::Zero(1, 1), Matrix::Constant(1, 1, -1.0)});
    EXPECT_FALSE(is_positive_definite(indefinite));
    try {
        logdet(indefinite);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_positive_definite);
    }
    const BlockCirculant singular({Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)});
    try {
        inverse(singular);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_invertible);
    }
}

TEST(BlockCirculant, NonHermitianSpectrumIsNotReal)
{
    SpectralForm s;
    s.psi = {CMatrix::Constant(1, 1, Complex(1.0, 0.0)), CMatrix::Constant(1, 1, Complex(0.0, 1.0)),
             CMatrix::Constant(1, 1, Complex(0.0, 1.0))};
    try {
        idft_reconstruct(s);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::non_real_reconstruction);
    }
}

TEST(CovBand, ValidationRejectsMalformedBands)
{
    EXPECT_THROW(CovBand(std::vector<Matrix>{}).validate(), error);
    EXPECT_THROW(CovBand({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}).validate(), error);
    EXPECT_THROW(CovBand({(Matrix(2, 2) << 1, 0.5, 0.2, 1).finished()}).validate(), error);
    EXPECT_THROW(CovBand({Matrix::Constant(1, 1, std::nan(""))}).validate(), error);
    EXPECT_NO_THROW(CovBand({Matrix::Identity(2, 2)}).validate());
}
