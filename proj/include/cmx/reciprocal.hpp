#ifndef CMX_RECIPROCAL_HPP
#define CMX_RECIPROCAL_HPP

/** @file
 * Stationary reciprocal models of order n on Z_N.
 *
 * A model is the banded symmetric block circulant
 *     M_N = Circ{M_0, M_1, ..., M_n, 0, ..., 0, M_n^T, ..., M_1^T},
 * i.e. sum_k M_k y(t-k) = e(t) with M_{-k} = M_k^T, and the process covariance
 * is Sigma_N = M_N^{-1}.  A positive definite block circulant is the
 * covariance of such a model exactly when its inverse is banded of bandwidth n.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"

namespace cmx {

struct ReciprocalModel {
    int N = 0;
    std::vector<Matrix> M; ///< M_0, ..., M_n

    ReciprocalModel() = default;
    ReciprocalModel(int size, std::vector<Matrix> blocks) : N(size), M(std::move(blocks)) {}

    int m() const { return M.empty() ? 0 : static_cast<int>(M.front().rows()); }
    int n() const { return static_cast<int>(M.size()) - 1; }

    BandedCirculant banded() const { return BandedCirculant(N, M); }
    BlockCirculant assemble() const { return banded().assemble(); }

    void validate() const
    {
        detail::require(!M.empty(), errc::input, "model has no blocks");
        const auto size = M.front().rows();
        detail::require(size > 0, errc::input, "empty model blocks");
        for (const auto& b : M) {
            detail::require(b.rows() == size && b.cols() == size, errc::input,
                            "model blocks must all be m x m");
            detail::require(detail::all_finite(b), errc::input, "non-finite model entry");
        }
        detail::require(N >= 2 * n() + 1, errc::dimension, "model needs N >= 2n+1");
        detail::require(detail::symmetry_defect(M.front()) <= 1e-12 * (1.0 + M.front().norm()),
                        errc::invalid_model, "M_0 is not symmetric");
    }

    static ReciprocalModel white(int m, int n, int N, double scale = 1.0)
    {
        std::vector<Matrix> blocks(static_cast<std::size_t>(n + 1), Matrix::Zero(m, m));
        blocks[0] = scale * Matrix::Identity(m, m);
        return ReciprocalModel(N, std::move(blocks));
    }
};

/// T realizations of one period; each realization is an m x N matrix whose column t is y(t).
struct Dataset {
    int m = 0;
    int N = 0;
    std::vector<Matrix> realizations;

    int T() const { return static_cast<int>(realizations.size()); }

    void validate() const
    {
        detail::require(m > 0 && N > 0, errc::input, "dataset dimensions must be positive");
        detail::require(!realizations.empty(), errc::input, "dataset has no realizations");
        for (const auto& y : realizations) {
            detail::require(y.rows() == m && y.cols() == N, errc::input,
                            "realization does not have shape m x N");
            detail::require(detail::all_finite(y), errc::input, "non-finite sample value");
        }
    }
};

/// Coefficient matrix and right-hand side of F * G = rhs for F = [F_{-n} .. F_{-1} F_1 .. F_n].
struct YuleWalkerSystem {
    Matrix coefficient; ///< 2nm x 2nm, a principal submatrix of Sigma_N
    Matrix rhs;         ///< m x 2nm, -[Sigma_n^T .. Sigma_1^T Sigma_1 .. Sigma_n]
};

/// Variance of the unnormalized conjugate process d(t).
struct ConjugateStats {
    Matrix Delta;
};

struct YuleWalkerResult {
    int order = 0;
    std::vector<Matrix> F; ///< F_{-n}, ..., F_0 = I, ..., F_n (index k + n)
    ConjugateStats stats;

    const Matrix& coeff(int k) const { return F[static_cast<std::size_t>(k + order)]; }

    /// Normalized coefficients M_k = Delta^{-1} F_k, k = 0..n, on Z_N.
    ReciprocalModel model(int N) const
    {
        const Eigen::LDLT<Matrix> ldlt(stats.Delta);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(stats.Delta, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() <= pd_rel_tol * (1.0 + eig.eigenvalues().cwiseAbs().maxCoeff())) {
            throw error(errc::degenerate_process, "conjugate variance Delta is singular");
        }
        std::vector<Matrix> blocks;
        blocks.reserve(static_cast<std::size_t>(order + 1));
        blocks.push_back(detail::symmetrized(ldlt.solve(Matrix::Identity(stats.Delta.rows(), stats.Delta.cols()))));
        for (int k = 1; k <= order; ++k) {
            blocks.push_back(ldlt.solve(coeff(k)));
        }
        return ReciprocalModel(N, std::move(blocks));
    }

    /// max_k ||Delta^{-1} F_{-k} - (Delta^{-1} F_k)^T||_F relative to ||Delta^{-1}||_F.
    double center_symmetry_defect() const
    {
        const Eigen::LDLT<Matrix> ldlt(stats.Delta);
        const double scale = ldlt.solve(Matrix::Identity(stats.Delta.rows(), stats.Delta.cols())).norm();
        double defect = 0.0;
        for (int k = 1; k <= order; ++k) {
            const Matrix plus = ldlt.solve(coeff(k));
            const Matrix minus = ldlt.solve(coeff(-k));
            defect = std::max(defect, (minus - plus.transpose()).norm());
        }
        return defect / scale;
    }
};

namespace detail {

// Lag accessor with Sigma_{-k} = Sigma_k^T.
inline Matrix lag(const std::vector<Matrix>& lags, int k)
{
    return k >= 0 ? lags[static_cast<std::size_t>(k)] : Matrix(lags[static_cast<std::size_t>(-k)].transpose());
}

} // namespace detail

/// Assemble the orthogonality system for the two-sided coefficients from lags Sigma_0..Sigma_{2n}.
inline YuleWalkerSystem yule_walker_system(const std::vector<Matrix>& lags)
{
    detail::require(!lags.empty() && lags.size() % 2 == 1, errc::input,
                    "Yule-Walker needs an odd number 2n+1 of lags");
    CovBand(lags).validate();
    const int order = static_cast<int>(lags.size() - 1) / 2;
    const int size = static_cast<int>(lags.front().rows());
    std::vector<int> index;
    for (int k = -order; k <= order; ++k) {
        if (k != 0) {
            index.push_back(k);
        }
    }
    const int width = 2 * order * size;
    YuleWalkerSystem sys{Matrix::Zero(width, width), Matrix::Zero(size, width)};
    for (int r = 0; r < 2 * order; ++r) {
        for (int c = 0; c < 2 * order; ++c) {
            sys.coefficient.block(r * size, c * size, size, size) =
                detail::lag(lags, index[static_cast<std::size_t>(c)] - index[static_cast<std::size_t>(r)]);
        }
        sys.rhs.block(0, r * size, size, size) = -detail::lag(lags, index[static_cast<std::size_t>(r)]);
    }
    return sys;
}

/**
 * Two-sided coefficients F_k (F_0 = I) from the 2n+1 lags Sigma_0..Sigma_{2n},
 * chosen so that d(t) = sum_k F_k y(t-k) is orthogonal to y(t-n..t-1) and
 * y(t+1..t+n), and Delta = Var d(t).
 */
inline YuleWalkerResult yule_walker(const std::vector<Matrix>& lags)
{
    const YuleWalkerSystem sys = yule_walker_system(lags);
    const int order = static_cast<int>(lags.size() - 1) / 2;
    const int size = static_cast<int>(lags.front().rows());

    YuleWalkerResult out;
    out.order = order;
    out.F.assign(static_cast<std::size_t>(2 * order + 1), Matrix::Zero(size, size));
    out.F[static_cast<std::size_t>(order)] = Matrix::Identity(size, size);

    if (order > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sys.coefficient);
        const Vector& values = eig.eigenvalues();
        if (values.minCoeff() <= pd_rel_tol * (1.0 + values.cwiseAbs().maxCoeff())) {
            throw error(errc::degenerate_process, "Yule-Walker coefficient matrix is singular");
        }
        // F G = rhs with G symmetric  <=>  G F^T = rhs^T.
        const Matrix solution = eig.eigenvectors() *
                                (values.cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * sys.rhs.transpose()));
        int slot = 0;
        for (int k = -order; k <= order; ++k) {
            if (k == 0) {
                continue;
            }
            out.F[static_cast<std::size_t>(k + order)] = solution.block(slot * size, 0, size, size).transpose();
            ++slot;
        }
    }

    Matrix delta = lags[0];
    for (int k = -order; k <= order; ++k) {
        if (k != 0) {
            delta.noalias() += out.coeff(k) * detail::lag(lags, -k);
        }
    }
    out.stats.Delta = detail::symmetrized(delta);
    return out;
}

/// Sigma_N = M_N^{-1}.
inline BlockCirculant covariance_of_model(const ReciprocalModel& model)
{
    model.validate();
    const BlockCirculant assembled = model.assemble();
    const SpectralCheck check = spectral_check(assembled);
    if (!check.positive_definite) {
        throw error(errc::invalid_model, "M_N is not positive definite (min eigenvalue " +
                                             std::to_string(check.min_eigenvalue) + ")");
    }
    return inverse(assembled);
}

class not_reciprocal_error : public error {
public:
    explicit not_reciprocal_error(double residual)
        : error(errc::not_reciprocal, "inverse band residual " + std::to_string(residual)),
          residual_(residual)
    {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline constexpr double default_band_tol = 1e-6;

/// Invert a covariance and accept it when the inverse is banded of bandwidth n.
inline ReciprocalModel model_from_covariance(const BlockCirculant& c, int n, double band_tol = default_band_tol)
{
    c.validate();
    detail::require(n >= 0 && 2 * n < c.N(), errc::dimension, "need n < N/2");
    if (!c.is_symmetric(1e-10) || !is_positive_definite(c)) {
        throw error(errc::not_a_covariance, "matrix is not symmetric positive definite");
    }
    const BlockCirculant inv = inverse(c);
    const double residual = band_residual(inv, n);
    if (residual > band_tol) {
        throw not_reciprocal_error(residual);
    }
    std::vector<Matrix> blocks(inv.first_col.begin(), inv.first_col.begin() + n + 1);
    blocks[0] = detail::symmetrized(blocks[0]);
    return ReciprocalModel(c.N(), std::move(blocks));
}

struct VerificationReport {
    double product_residual = 0.0;  ///< ||M_N C - I||_F
    double band_residual = 0.0;     ///< off-band mass of C^{-1} at bandwidth n
    double symmetry_defect = 0.0;   ///< max_k ||M_{-k} - M_k^T||_F of the assembled model

    bool ok(double tol = 1e-8) const
    {
        return product_residual <= tol && band_residual <= tol && symmetry_defect <= tol;
    }
};

inline VerificationReport verify_model(const ReciprocalModel& model, const BlockCirculant& c)
{
    model.validate();
    c.validate();
    detail::require(model.N == c.N() && model.m() == c.m(), errc::dimension,
                    "model and covariance differ in shape");
    VerificationReport report;
    const BlockCirculant assembled = model.assemble();
    const BlockCirculant product = multiply(assembled, c);
    double sq = 0.0;
    for (int k = 0; k < product.N(); ++k) {
        Matrix diff = product.block(k);
        if (k == 0) {
            diff -= Matrix::Identity(c.m(), c.m());
        }
        sq += diff.squaredNorm();
    }
    report.product_residual = std::sqrt(static_cast<double>(c.N()) * sq);
    try {
        report.band_residual = band_residual(inverse(c), model.n());
    } catch (const error&) {
        report.band_residual = std::numeric_limits<double>::infinity();
    }
    double defect = detail::symmetry_defect(assembled.block(0));
    for (int k = 1; k <= model.n(); ++k) {
        defect = std::max(defect, (assembled.block(-k) - assembled.block(k).transpose()).norm());
    }
    report.symmetry_defect = defect;
    return report;
}

/**
 * T independent zero-mean Gaussian periods with covariance M_N^{-1}.
 *
 * Each frequency block of the covariance is Psi_l(M)^{-1}; with its Hermitian
 * square root R_l and circular complex normals z_l, the inverse transform of
 * R_l z_l has real and imaginary parts that are two independent draws, so one
 * transform yields two realizations.
 */
inline Dataset sample(const ReciprocalModel& model, int T, std::uint64_t seed)
{
    model.validate();
    detail::require(T >= 1, errc::input, "T must be at least 1");
    const SpectralForm spec = dft_block_diagonalize(model.assemble());
    const SpectralCheck check = spectral_check(spec);
    if (!check.positive_definite) {
        throw error(errc::invalid_model, "M_N is not positive definite");
    }
    const int size = model.m();
    const int count = model.N;
    std::vector<CMatrix> root(static_cast<std::size_t>(count));
    for (int l = 0; l <= count / 2; ++l) {
        const CMatrix herm = 0.5 * (spec.psi[static_cast<std::size_t>(l)] + spec.psi[static_cast<std::size_t>(l)].adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
        root[static_cast<std::size_t>(l)] = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                            eig.eigenvectors().adjoint();
    }
    for (int l = count / 2 + 1; l < count; ++l) {
        root[static_cast<std::size_t>(l)] = root[static_cast<std::size_t>(count - l)].conjugate();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::FFT<double> fft;
    const double norm = 1.0 / std::sqrt(static_cast<double>(count));

    Dataset data;
    data.m = size;
    data.N = count;
    data.realizations.reserve(static_cast<std::size_t>(T));
    std::vector<Complex> freq(static_cast<std::size_t>(count));
    std::vector<Complex> time;
    CMatrix g(size, count);
    while (data.T() < T) {
        for (int l = 0; l < count; ++l) {
            Eigen::VectorXcd z(size);
            for (int p = 0; p < size; ++p) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                z(p) = Complex(re, im);
            }
            g.col(l) = root[static_cast<std::size_t>(l)] * z;
        }
        Matrix real_part(size, count);
        Matrix imag_part(size, count);
        for (int p = 0; p < size; ++p) {
            for (int l = 0; l < count; ++l) {
                freq[static_cast<std::size_t>(l)] = g(p, l);
            }
            // u(t) = N^{-1/2} sum_l exp(-j 2 pi l t / N) g_l
            detail::forward_dft(fft, time, freq);
            for (int t = 0; t < count; ++t) {
                real_part(p, t) = norm * time[static_cast<std::size_t>(t)].real();
                imag_part(p, t) = norm * time[static_cast<std::size_t>(t)].imag();
            }
        }
        data.realizations.push_back(std::move(real_part));
        if (data.T() < T) {
            data.realizations.push_back(std::move(imag_part));
        }
    }
    return data;
}

} // namespace cmx

#endif // CMX_RECIPROCAL_HPP
