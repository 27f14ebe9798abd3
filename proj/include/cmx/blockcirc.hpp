#ifndef CMX_BLOCKCIRC_HPP
#define CMX_BLOCKCIRC_HPP

/** @file
 * Block-circulant and block-Toeplitz algebra.
 *
 * A block-circulant matrix with N blocks of size m x m is stored by its first
 * block column C_0, ..., C_{N-1}; block (i, j) of the assembled matrix is
 * C_{(i - j) mod N}.  Lags follow the orientation Sigma_k = E y(t+k) y(t)^T, so
 * the covariance of a stationary process on Z_N has first column
 * (Sigma_0, Sigma_1, ..., Sigma_1^T) and its leading (n+1)-block principal
 * section is the block Toeplitz matrix T_n with block (i, j) = Sigma_{i-j}.
 *
 * Frequency blocks use
 *     Psi_l = sum_k C_k exp(+j 2 pi l k / N),
 * which are Hermitian with Psi_{N-l} = conj(Psi_l) whenever C is real
 * symmetric.  The eigenvalues of the assembled matrix are the union of the
 * eigenvalues of the Psi_l.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "cmx/core.hpp"
#include "cmx/parallel.hpp"

namespace cmx {

/// Covariance band Sigma_0, ..., Sigma_n (lag k block is E y(t+k) y(t)^T).
struct CovBand {
    std::vector<Matrix> sigma;

    CovBand() = default;
    explicit CovBand(std::vector<Matrix> blocks) : sigma(std::move(blocks)) {}

    int m() const { return sigma.empty() ? 0 : static_cast<int>(sigma.front().rows()); }
    int n() const { return static_cast<int>(sigma.size()) - 1; }

    /// Throws errc::input unless the blocks are square, equal-sized, finite, and Sigma_0 is symmetric.
    void validate() const
    {
        detail::require(!sigma.empty(), errc::input, "band has no blocks");
        const auto size = sigma.front().rows();
        detail::require(size > 0, errc::input, "empty blocks");
        for (const auto& block : sigma) {
            detail::require(block.rows() == size && block.cols() == size, errc::input,
                            "band blocks must all be m x m");
            detail::require(detail::all_finite(block), errc::input, "non-finite band entry");
        }
        const double scale = 1.0 + sigma.front().norm();
        detail::require(detail::symmetry_defect(sigma.front()) <= 1e-12 * scale, errc::input,
                        "Sigma_0 is not symmetric");
    }
};

/// Symmetric block-circulant matrix stored by its first block column.
struct BlockCirculant {
    std::vector<Matrix> first_col;

    BlockCirculant() = default;
    explicit BlockCirculant(std::vector<Matrix> col) : first_col(std::move(col)) {}

    int m() const { return first_col.empty() ? 0 : static_cast<int>(first_col.front().rows()); }
    int N() const { return static_cast<int>(first_col.size()); }

    const Matrix& block(int k) const
    {
        const int size = N();
        return first_col[static_cast<std::size_t>(((k % size) + size) % size)];
    }

    static BlockCirculant identity(int m, int N) { return scaled_identity(m, N, 1.0); }

    static BlockCirculant scaled_identity(int m, int N, double value)
    {
        std::vector<Matrix> col(static_cast<std::size_t>(N), Matrix::Zero(m, m));
        col.front() = value * Matrix::Identity(m, m);
        return BlockCirculant(std::move(col));
    }

    void validate() const
    {
        detail::require(!first_col.empty(), errc::input, "circulant has no blocks");
        const auto size = first_col.front().rows();
        detail::require(size > 0, errc::input, "empty blocks");
        for (const auto& b : first_col) {
            detail::require(b.rows() == size && b.cols() == size, errc::input,
                            "circulant blocks must all be m x m");
            detail::require(detail::all_finite(b), errc::input, "non-finite circulant entry");
        }
    }

    /// max over k of ||C_{N-k} - C_k^T||_F relative to the largest block.
    double symmetry_defect() const
    {
        double defect = 0.0;
        double scale = 0.0;
        for (int k = 0; k < N(); ++k) {
            defect = std::max(defect, (block(-k) - block(k).transpose()).norm());
            scale = std::max(scale, block(k).norm());
        }
        return scale > 0.0 ? defect / scale : defect;
    }

    bool is_symmetric(double tol = 1e-12) const { return symmetry_defect() <= tol; }

    Matrix to_dense() const
    {
        const int size = m();
        const int count = N();
        Matrix dense(size * count, size * count);
        for (int i = 0; i < count; ++i) {
            for (int j = 0; j < count; ++j) {
                dense.block(i * size, j * size, size, size) = block(i - j);
            }
        }
        return dense;
    }
};

/**
 * Banded symmetric block-circulant matrix Circ{B_0, B_1, ..., B_n, 0, ..., 0,
 * B_n^T, ..., B_1^T}.  Used both for covariance bands wrapped onto Z_N and for
 * the banded inverse (model) coefficients.
 */
struct BandedCirculant {
    int N = 0;
    std::vector<Matrix> blocks;

    BandedCirculant() = default;
    BandedCirculant(int size, std::vector<Matrix> b) : N(size), blocks(std::move(b)) {}

    int m() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
    int n() const { return static_cast<int>(blocks.size()) - 1; }

    BlockCirculant assemble() const
    {
        detail::require(!blocks.empty(), errc::input, "banded circulant has no blocks");
        detail::require(N >= 2 * n() + 1, errc::dimension,
                        "N = " + std::to_string(N) + " < 2n+1 = " + std::to_string(2 * n() + 1));
        std::vector<Matrix> col(static_cast<std::size_t>(N), Matrix::Zero(m(), m()));
        col[0] = blocks[0];
        for (int k = 1; k <= n(); ++k) {
            col[static_cast<std::size_t>(k)] = blocks[static_cast<std::size_t>(k)];
            col[static_cast<std::size_t>(N - k)] = blocks[static_cast<std::size_t>(k)].transpose();
        }
        return BlockCirculant(std::move(col));
    }

    /// Frobenius norm of the assembled mN x mN matrix.
    double frobenius_norm() const
    {
        double sq = blocks.empty() ? 0.0 : blocks[0].squaredNorm();
        for (int k = 1; k <= n(); ++k) {
            sq += 2.0 * blocks[static_cast<std::size_t>(k)].squaredNorm();
        }
        return std::sqrt(static_cast<double>(N) * sq);
    }
};

/// Trace inner product <A, B> = Tr(A^T B) of the assembled banded matrices.
inline double inner(const BandedCirculant& a, const BandedCirculant& b)
{
    detail::require(a.N == b.N && a.blocks.size() == b.blocks.size() && a.m() == b.m(),
                    errc::dimension, "banded circulants differ in shape");
    double acc = a.blocks[0].cwiseProduct(b.blocks[0]).sum();
    for (std::size_t k = 1; k < a.blocks.size(); ++k) {
        acc += 2.0 * a.blocks[k].cwiseProduct(b.blocks[k]).sum();
    }
    return static_cast<double>(a.N) * acc;
}

/// Trace inner product <A, B> = Tr(A^T B) of two assembled block circulants.
inline double inner(const BlockCirculant& a, const BlockCirculant& b)
{
    detail::require(a.N() == b.N() && a.m() == b.m(), errc::dimension,
                    "circulants differ in shape");
    double acc = 0.0;
    for (int k = 0; k < a.N(); ++k) {
        acc += a.block(k).cwiseProduct(b.block(k)).sum();
    }
    return static_cast<double>(a.N()) * acc;
}

inline double frobenius_norm(const BlockCirculant& c) { return std::sqrt(inner(c, c)); }

inline BlockCirculant operator+(const BlockCirculant& a, const BlockCirculant& b)
{
    detail::require(a.N() == b.N() && a.m() == b.m(), errc::dimension, "shape mismatch");
    std::vector<Matrix> col(a.first_col);
    for (std::size_t k = 0; k < col.size(); ++k) {
        col[k] += b.first_col[k];
    }
    return BlockCirculant(std::move(col));
}

inline BlockCirculant operator*(double s, const BlockCirculant& a)
{
    std::vector<Matrix> col(a.first_col);
    for (auto& b : col) {
        b *= s;
    }
    return BlockCirculant(std::move(col));
}

inline BlockCirculant operator-(const BlockCirculant& a, const BlockCirculant& b)
{
    return a + (-1.0) * b;
}

/// Circulant transpose: first column C_{N-k}^T.
inline BlockCirculant transpose(const BlockCirculant& c)
{
    std::vector<Matrix> col(c.first_col.size());
    for (int k = 0; k < c.N(); ++k) {
        col[static_cast<std::size_t>(k)] = c.block(-k).transpose();
    }
    return BlockCirculant(std::move(col));
}

/// Product of two block circulants by direct cyclic convolution of the first columns.
inline BlockCirculant multiply(const BlockCirculant& a, const BlockCirculant& b)
{
    detail::require(a.N() == b.N() && a.m() == b.m(), errc::dimension, "shape mismatch");
    const int count = a.N();
    std::vector<Matrix> col(static_cast<std::size_t>(count), Matrix::Zero(a.m(), a.m()));
    detail::parallel_for(static_cast<std::size_t>(count),
                         static_cast<std::size_t>(count * a.m() * a.m() * a.m()), [&](std::size_t k) {
                             Matrix acc = Matrix::Zero(a.m(), a.m());
                             for (int j = 0; j < count; ++j) {
                                 acc.noalias() += a.block(static_cast<int>(k) - j) * b.block(j);
                             }
                             col[k] = std::move(acc);
                         });
    return BlockCirculant(std::move(col));
}

/// Frequency blocks Psi_0, ..., Psi_{N-1} of a block-circulant matrix.
struct SpectralForm {
    std::vector<CMatrix> psi;

    int m() const { return psi.empty() ? 0 : static_cast<int>(psi.front().rows()); }
    int N() const { return static_cast<int>(psi.size()); }
};

/// Per-frequency Hermitian eigenvalues and the scale-relative positivity verdict.
struct SpectralCheck {
    double min_eigenvalue = 0.0;
    double max_norm = 0.0;
    int worst_frequency = 0;
    bool positive_definite = false;

    double threshold() const { return pd_rel_tol * (1.0 + max_norm); }
};

/// Wrap the band onto Z_N with every unknown lag set to zero.
inline BlockCirculant assemble_circulant(const CovBand& band, int N)
{
    band.validate();
    detail::require(N >= 2 * band.n() + 1, errc::dimension,
                    "N = " + std::to_string(N) + " < 2n+1 = " + std::to_string(2 * band.n() + 1));
    return BandedCirculant(N, band.sigma).assemble();
}

namespace detail {

// Unnormalized forward transform sum_k x_k exp(-j 2 pi l k / N).  kissfft
// cannot plan a length-1 transform, which is the identity anyway.
template <class In>
void forward_dft(Eigen::FFT<double>& fft, std::vector<Complex>& out, const std::vector<In>& in)
{
    if (in.size() == 1) {
        out.assign(1, Complex(in[0]));
        return;
    }
    fft.fwd(out, in);
}

} // namespace detail

inline SpectralForm dft_block_diagonalize(const BlockCirculant& c)
{
    c.validate();
    const int size = c.m();
    const int count = c.N();
    SpectralForm out;
    out.psi.assign(static_cast<std::size_t>(count), CMatrix::Zero(size, size));
    Eigen::FFT<double> fft;
    std::vector<double> series(static_cast<std::size_t>(count));
    std::vector<Complex> spectrum;
    for (int p = 0; p < size; ++p) {
        for (int q = 0; q < size; ++q) {
            for (int k = 0; k < count; ++k) {
                series[static_cast<std::size_t>(k)] = c.first_col[static_cast<std::size_t>(k)](p, q);
            }
            // fwd() uses exp(-j...), conj() turns it into exp(+j...) for real input.
            detail::forward_dft(fft, spectrum, series);
            for (int l = 0; l < count; ++l) {
                out.psi[static_cast<std::size_t>(l)](p, q) = std::conj(spectrum[static_cast<std::size_t>(l)]);
            }
        }
    }
    return out;
}

inline BlockCirculant idft_reconstruct(const SpectralForm& s)
{
    detail::require(s.N() > 0 && s.m() > 0, errc::input, "empty spectral form");
    const int size = s.m();
    const int count = s.N();
    std::vector<Matrix> col(static_cast<std::size_t>(count), Matrix::Zero(size, size));
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum(static_cast<std::size_t>(count));
    std::vector<Complex> series;
    double max_imag = 0.0;
    double max_real = 0.0;
    for (int p = 0; p < size; ++p) {
        for (int q = 0; q < size; ++q) {
            for (int l = 0; l < count; ++l) {
                spectrum[static_cast<std::size_t>(l)] = s.psi[static_cast<std::size_t>(l)](p, q);
            }
            // C_k = (1/N) sum_l Psi_l exp(-j 2 pi l k / N) is exactly fwd()/N.
            detail::forward_dft(fft, series, spectrum);
            for (int k = 0; k < count; ++k) {
                const Complex v = series[static_cast<std::size_t>(k)] / static_cast<double>(count);
                col[static_cast<std::size_t>(k)](p, q) = v.real();
                max_imag = std::max(max_imag, std::abs(v.imag()));
                max_real = std::max(max_real, std::abs(v.real()));
            }
        }
    }
    if (max_imag > real_residue_tol * std::max(1.0, max_real)) {
        throw error(errc::non_real_reconstruction,
                    "imaginary residue " + std::to_string(max_imag));
    }
    return BlockCirculant(std::move(col));
}

namespace detail {

// Hermitian eigenvalues of every frequency block. Only l = 0..floor(N/2) are
// decomposed; the rest mirror them because Psi_{N-l} = conj(Psi_l).
inline std::vector<Vector> frequency_eigenvalues(const SpectralForm& s)
{
    const int count = s.N();
    const int size = s.m();
    const int half = count / 2;
    std::vector<Vector> eig(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(half + 1), static_cast<std::size_t>(size * size * size * 8),
                 [&](std::size_t l) {
                     const CMatrix herm = 0.5 * (s.psi[l] + s.psi[l].adjoint());
                     Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
                     eig[l] = solver.eigenvalues();
                 });
    for (int l = half + 1; l < count; ++l) {
        eig[static_cast<std::size_t>(l)] = eig[static_cast<std::size_t>(count - l)];
    }
    return eig;
}

inline SpectralCheck check_eigenvalues(const SpectralForm& s, const std::vector<Vector>& eig)
{
    SpectralCheck check;
    check.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (int l = 0; l < s.N(); ++l) {
        const Vector& values = eig[static_cast<std::size_t>(l)];
        check.max_norm = std::max(check.max_norm, values.cwiseAbs().maxCoeff());
        if (values.minCoeff() < check.min_eigenvalue) {
            check.min_eigenvalue = values.minCoeff();
            check.worst_frequency = l;
        }
    }
    check.positive_definite = check.min_eigenvalue > check.threshold();
    return check;
}

} // namespace detail

inline SpectralCheck spectral_check(const SpectralForm& s)
{
    return detail::check_eigenvalues(s, detail::frequency_eigenvalues(s));
}

inline SpectralCheck spectral_check(const BlockCirculant& c)
{
    return spectral_check(dft_block_diagonalize(c));
}

inline bool is_positive_definite(const BlockCirculant& c) { return spectral_check(c).positive_definite; }

/// log det of a symmetric positive definite block circulant, summed over frequencies in index order.
inline double logdet(const BlockCirculant& c)
{
    const SpectralForm s = dft_block_diagonalize(c);
    const auto eig = detail::frequency_eigenvalues(s);
    const SpectralCheck check = detail::check_eigenvalues(s, eig);
    if (!check.positive_definite) {
        throw error(errc::not_positive_definite,
                    "min frequency eigenvalue " + std::to_string(check.min_eigenvalue) +
                        " at l = " + std::to_string(check.worst_frequency));
    }
    double total = 0.0;
    for (const auto& values : eig) {
        total += values.array().log().sum();
    }
    return total;
}

/// Frequency-wise inverse. Works for any symmetric nonsingular circulant.
inline BlockCirculant inverse(const BlockCirculant& c)
{
    SpectralForm s = dft_block_diagonalize(c);
    const int count = s.N();
    const int half = count / 2;
    std::vector<double> min_abs(static_cast<std::size_t>(half + 1));
    std::vector<double> max_abs(static_cast<std::size_t>(half + 1));
    detail::parallel_for(static_cast<std::size_t>(half + 1),
                         static_cast<std::size_t>(c.m() * c.m() * c.m() * 16), [&](std::size_t l) {
                             const CMatrix herm = 0.5 * (s.psi[l] + s.psi[l].adjoint());
                             Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
                             const Vector& values = solver.eigenvalues();
                             min_abs[l] = values.cwiseAbs().minCoeff();
                             max_abs[l] = values.cwiseAbs().maxCoeff();
                             if (min_abs[l] > 0.0) {
                                 s.psi[l] = solver.eigenvectors() * values.cwiseInverse().asDiagonal() *
                                            solver.eigenvectors().adjoint();
                             }
                         });
    const double scale = *std::max_element(max_abs.begin(), max_abs.end());
    for (int l = 0; l <= half; ++l) {
        if (min_abs[static_cast<std::size_t>(l)] <= pd_rel_tol * (1.0 + scale)) {
            throw error(errc::not_invertible, "singular frequency block l = " + std::to_string(l));
        }
    }
    for (int l = half + 1; l < count; ++l) {
        s.psi[static_cast<std::size_t>(l)] = s.psi[static_cast<std::size_t>(count - l)].conjugate();
    }
    return idft_reconstruct(s);
}

/**
 * Orthogonal projection of a symmetric mN x mN matrix onto the block
 * circulants: block C_k is the average of the N blocks on cyclic block
 * diagonal k.
 */
inline BlockCirculant project_circulant(const Matrix& dense, int m)
{
    detail::require(m > 0 && dense.rows() == dense.cols() && dense.rows() % m == 0 && dense.rows() > 0,
                    errc::dimension, "matrix is not mN x mN");
    const int count = static_cast<int>(dense.rows()) / m;
    std::vector<Matrix> col(static_cast<std::size_t>(count), Matrix::Zero(m, m));
    for (int k = 0; k < count; ++k) {
        Matrix acc = Matrix::Zero(m, m);
        for (int i = 0; i < count; ++i) {
            acc += dense.block(((i + k) % count) * m, i * m, m, m);
        }
        col[static_cast<std::size_t>(k)] = acc / static_cast<double>(count);
    }
    return BlockCirculant(std::move(col));
}

/// Off-band mass ||C_{n+1..N-n-1}||_F / ||C||_F; zero iff C is banded of bandwidth n.
inline double band_residual(const BlockCirculant& c, int n)
{
    detail::require(n >= 0 && 2 * n < c.N(), errc::dimension,
                    "bandwidth n = " + std::to_string(n) + " must satisfy n < N/2");
    double off = 0.0;
    double total = 0.0;
    for (int k = 0; k < c.N(); ++k) {
        const double sq = c.block(k).squaredNorm();
        total += sq;
        if (k > n && k < c.N() - n) {
            off += sq;
        }
    }
    return total > 0.0 ? std::sqrt(off / total) : 0.0;
}

/// The band Sigma_0..Sigma_n read off the first column of a circulant.
inline CovBand band_of(const BlockCirculant& c, int n)
{
    detail::require(n >= 0 && n < c.N(), errc::dimension, "band order exceeds N - 1");
    return CovBand(std::vector<Matrix>(c.first_col.begin(), c.first_col.begin() + n + 1));
}

/// Dense block Toeplitz matrix T_n with block (i, j) = Sigma_{i-j}, Sigma_{-k} = Sigma_k^T.
inline Matrix toeplitz(const CovBand& band)
{
    band.validate();
    const int size = band.m();
    const int order = band.n();
    Matrix t((order + 1) * size, (order + 1) * size);
    for (int i = 0; i <= order; ++i) {
        for (int j = 0; j <= order; ++j) {
            t.block(i * size, j * size, size, size) =
                i >= j ? band.sigma[static_cast<std::size_t>(i - j)]
                       : Matrix(band.sigma[static_cast<std::size_t>(j - i)].transpose());
        }
    }
    return t;
}

/// T_n > 0 with the library's scale-relative margin.
inline bool is_strictly_positive(const CovBand& band)
{
    const Matrix t = toeplitz(band);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(t, Eigen::EigenvaluesOnly);
    const Vector& values = solver.eigenvalues();
    const double scale = values.cwiseAbs().maxCoeff();
    return values.minCoeff() > pd_rel_tol * (1.0 + scale);
}

} // namespace cmx

#endif // CMX_BLOCKCIRC_HPP
