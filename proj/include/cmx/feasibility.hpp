#ifndef CMX_FEASIBILITY_HPP
#define CMX_FEASIBILITY_HPP

/** @file
 * Constructive feasibility of the circulant band extension.
 *
 * The band is first extended to an infinite lag sequence by the
 * maximum-entropy (autoregressive) Toeplitz extension produced by the block
 * Levinson-Whittle recursion.  The extended sequence is then wrapped onto Z_N
 * and the wrap is accepted when every frequency block is positive definite.
 * For N large enough the wrap is always positive definite whenever T_n > 0.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"

namespace cmx {

/// Forward matrix AR polynomial I + A_1 z^{-1} + ... + A_n z^{-n} and its innovation.
struct LevinsonResult {
    std::vector<Matrix> ar_coeffs; ///< A_1, ..., A_n
    Matrix innovation;             ///< Lambda_n, forward prediction error covariance

    int n() const { return static_cast<int>(ar_coeffs.size()); }
    int m() const { return static_cast<int>(innovation.rows()); }
};

/// min_l lambda_min(Psi_l) of the AR wrap at each scanned N.
struct WrapTrace {
    int N = 0;
    double min_eigenvalue = 0.0;
    bool positive_definite = false;
};

class horizon_exhausted_error : public error {
public:
    explicit horizon_exhausted_error(std::vector<WrapTrace> trace)
        : error(errc::horizon_exhausted,
                "no positive definite wrap up to N = " +
                    std::to_string(trace.empty() ? 0 : trace.back().N)),
          trace_(std::move(trace))
    {}

    const std::vector<WrapTrace>& trace() const noexcept { return trace_; }

private:
    std::vector<WrapTrace> trace_;
};

/// Smallest feasible N together with its wrapped circulant.
struct FeasibleExtension {
    int N = 0;
    BlockCirculant wrap;
    std::vector<WrapTrace> trace;
};

namespace detail {

inline bool innovation_is_pd(const Matrix& v, double scale)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(v), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() > pd_rel_tol * (1.0 + scale);
}

} // namespace detail

/**
 * Multichannel Levinson-Whittle recursion on the block Toeplitz matrix T_n.
 *
 * Forward and backward predictors are updated together; at each order the
 * forward and backward innovations are Schur complements of T_p, so T_n > 0
 * exactly when every innovation stays positive definite.
 */
inline LevinsonResult block_levinson(const CovBand& band)
{
    band.validate();
    const int order = band.n();
    const auto& s = band.sigma;
    const double scale = Eigen::SelfAdjointEigenSolver<Matrix>(s[0], Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff();

    Matrix forward_var = s[0];
    Matrix backward_var = s[0];
    if (!detail::innovation_is_pd(forward_var, scale)) {
        throw error(errc::infeasible_band, "Sigma_0 is not positive definite");
    }
    std::vector<Matrix> fwd;
    std::vector<Matrix> bwd;
    fwd.reserve(static_cast<std::size_t>(order));
    bwd.reserve(static_cast<std::size_t>(order));

    for (int p = 0; p < order; ++p) {
        // Cross term E e_f(t) y(t-p-1)^T.
        Matrix cross = s[static_cast<std::size_t>(p + 1)];
        for (int j = 1; j <= p; ++j) {
            cross.noalias() += fwd[static_cast<std::size_t>(j - 1)] * s[static_cast<std::size_t>(p + 1 - j)];
        }
        const Matrix kf = -backward_var.ldlt().solve(cross.transpose()).transpose();
        const Matrix kb = -forward_var.ldlt().solve(cross).transpose();

        std::vector<Matrix> next_fwd(static_cast<std::size_t>(p + 1));
        std::vector<Matrix> next_bwd(static_cast<std::size_t>(p + 1));
        for (int j = 1; j <= p; ++j) {
            next_fwd[static_cast<std::size_t>(j - 1)] =
                fwd[static_cast<std::size_t>(j - 1)] + kf * bwd[static_cast<std::size_t>(p - j)];
            next_bwd[static_cast<std::size_t>(j - 1)] =
                bwd[static_cast<std::size_t>(j - 1)] + kb * fwd[static_cast<std::size_t>(p - j)];
        }
        next_fwd[static_cast<std::size_t>(p)] = kf;
        next_bwd[static_cast<std::size_t>(p)] = kb;
        fwd = std::move(next_fwd);
        bwd = std::move(next_bwd);

        forward_var = detail::symmetrized(forward_var + kf * cross.transpose());
        backward_var = detail::symmetrized(backward_var + kb * cross);
        if (!detail::innovation_is_pd(forward_var, scale) ||
            !detail::innovation_is_pd(backward_var, scale)) {
            throw error(errc::infeasible_band,
                        "innovation lost positivity at order " + std::to_string(p + 1));
        }
    }
    return LevinsonResult{std::move(fwd), std::move(forward_var)};
}

/// Lags Sigma_{n+1}, ..., Sigma_{n+count} of the maximum-entropy Toeplitz extension.
inline std::vector<Matrix> ar_extend(const LevinsonResult& lev, const CovBand& band, int count)
{
    band.validate();
    detail::require(lev.n() == band.n() && lev.m() == band.m(), errc::dimension,
                    "Levinson result does not match the band");
    detail::require(count >= 0, errc::input, "negative extension count");
    const int order = band.n();
    std::vector<Matrix> lags(band.sigma);
    lags.reserve(static_cast<std::size_t>(order + 1 + count));
    for (int i = order + 1; i <= order + count; ++i) {
        Matrix next = Matrix::Zero(band.m(), band.m());
        for (int j = 1; j <= order; ++j) {
            next.noalias() -= lev.ar_coeffs[static_cast<std::size_t>(j - 1)] * lags[static_cast<std::size_t>(i - j)];
        }
        lags.push_back(std::move(next));
    }
    return {lags.begin() + order + 1, lags.end()};
}

/**
 * Wrap a lag sequence Sigma_0, Sigma_1, ... onto Z_N.  Odd N uses lags up to
 * (N-1)/2 on both sides; even N puts Sigma_{N/2} + Sigma_{N/2}^T in the single
 * centre slot.
 */
inline BlockCirculant wrap_lags(const std::vector<Matrix>& lags, int N)
{
    detail::require(N >= 1, errc::dimension, "N must be positive");
    const int half = N / 2;
    detail::require(static_cast<int>(lags.size()) > half, errc::dimension,
                    "not enough lags to wrap onto N = " + std::to_string(N));
    std::vector<Matrix> col(static_cast<std::size_t>(N));
    col[0] = lags[0];
    const int sides = (N % 2 == 1) ? half : half - 1;
    for (int k = 1; k <= sides; ++k) {
        col[static_cast<std::size_t>(k)] = lags[static_cast<std::size_t>(k)];
        col[static_cast<std::size_t>(N - k)] = lags[static_cast<std::size_t>(k)].transpose();
    }
    if (N % 2 == 0 && N >= 2) {
        col[static_cast<std::size_t>(half)] =
            lags[static_cast<std::size_t>(half)] + lags[static_cast<std::size_t>(half)].transpose();
    }
    return BlockCirculant(std::move(col));
}

/// AR-extended band wrapped onto Z_N (band blocks are copied unchanged).
inline BlockCirculant wrap_ar_extension(const CovBand& band, const LevinsonResult& lev, int N)
{
    detail::require(N >= 2 * band.n() + 1, errc::dimension, "N < 2n+1");
    const int needed = std::max(0, N / 2 - band.n());
    std::vector<Matrix> lags(band.sigma);
    const auto extra = ar_extend(lev, band, needed);
    lags.insert(lags.end(), extra.begin(), extra.end());
    return wrap_lags(lags, N);
}

inline int default_horizon(int n) { return 16 * (2 * n + 1); }

/**
 * Smallest N in [2n+1, N_max] whose AR wrap is positive definite at every
 * frequency.  N_max <= 0 selects the default horizon 16(2n+1).
 *
 * This is the smallest N for the wrapped AR extension; a different completion
 * may already be positive definite at a smaller N.
 */
inline FeasibleExtension find_feasible_N(const CovBand& band, int N_max = 0)
{
    const LevinsonResult lev = block_levinson(band);
    const int first = 2 * band.n() + 1;
    const int last = N_max > 0 ? N_max : default_horizon(band.n());
    detail::require(last >= first, errc::input,
                    "horizon " + std::to_string(last) + " below 2n+1 = " + std::to_string(first));

    std::vector<Matrix> lags(band.sigma);
    const auto extra = ar_extend(lev, band, std::max(0, last / 2 - band.n()));
    lags.insert(lags.end(), extra.begin(), extra.end());

    std::vector<WrapTrace> trace;
    for (int N = first; N <= last; ++N) {
        BlockCirculant wrap = wrap_lags(lags, N);
        const SpectralCheck check = spectral_check(wrap);
        trace.push_back({N, check.min_eigenvalue, check.positive_definite});
        if (check.positive_definite) {
            return FeasibleExtension{N, std::move(wrap), std::move(trace)};
        }
    }
    throw horizon_exhausted_error(std::move(trace));
}

} // namespace cmx

#endif // CMX_FEASIBILITY_HPP
