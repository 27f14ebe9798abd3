#ifndef CMX_IDENTIFY_HPP
#define CMX_IDENTIFY_HPP

/** @file
 * Maximum-likelihood identification of a reciprocal model of bandwidth n from
 * T periods of data on Z_N.
 *
 * For a banded model the Gaussian likelihood depends on the data only through
 * the circular sample lags Sigma_0..Sigma_n, and the maximizer is the
 * maximum-entropy completion of those lags.
 */

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"
#include "cmx/maxent.hpp"
#include "cmx/reciprocal.hpp"

namespace cmx {

struct SufficientStats {
    CovBand band; ///< circular sample lags Sigma_0..Sigma_n
    int N = 0;
    int T = 0;
};

/// Sigma_k = 1/(NT) sum over realizations and s of y(s+k) y(s)^T, indices mod N.
inline SufficientStats sufficient_statistics(const Dataset& data, int n)
{
    data.validate();
    detail::require(n >= 0, errc::input, "bandwidth must be non-negative");
    detail::require(2 * n < data.N, errc::dimension,
                    "bandwidth n = " + std::to_string(n) + " needs N > 2n, got N = " + std::to_string(data.N));
    const int size = data.m;
    const int count = data.N;
    std::vector<Matrix> lags(static_cast<std::size_t>(n + 1), Matrix::Zero(size, size));
    for (const Matrix& y : data.realizations) {
        for (int k = 0; k <= n; ++k) {
            Matrix shifted(size, count);
            shifted.leftCols(count - k) = y.rightCols(count - k);
            shifted.rightCols(k) = y.leftCols(k);
            lags[static_cast<std::size_t>(k)].noalias() += shifted * y.transpose();
        }
    }
    const double scale = 1.0 / (static_cast<double>(count) * data.T());
    for (auto& s : lags) {
        s *= scale;
    }
    lags[0] = detail::symmetrized(lags[0]);
    return SufficientStats{CovBand(std::move(lags)), count, data.T()};
}

/**
 * Normalized log-likelihood log det M_N - <M_N, Sigma_hat>.
 *
 * Equals 2/T times the Gaussian log-likelihood plus a constant, and equals
 * minus the dual objective at the sample band.
 */
inline double log_likelihood(const ReciprocalModel& model, const SufficientStats& stats)
{
    model.validate();
    detail::require(model.m() == stats.band.m() && model.n() == stats.band.n(), errc::dimension,
                    "model and statistics differ in shape");
    return -dual_objective(model.banded(), stats.band);
}

struct IdentifyConfig {
    double ridge = 0.0; ///< added to Sigma_0 before fitting
    int extend_N = 0;   ///< fit on this period instead of the data period when > 0
    SolverConfig solver;
};

struct IdentifyDiagnostics {
    SolverDiagnostics solver;
    double log_likelihood = 0.0;
    double band_match_residual = 0.0;
    /// Relative difference between the solver's dual iterate and the model read off the covariance.
    double model_route_difference = 0.0;
};

struct IdentifyResult {
    ReciprocalModel model;
    BlockCirculant covariance;
    SufficientStats stats;
    IdentifyDiagnostics diagnostics;
};

inline IdentifyResult identify(const Dataset& data, int n, const IdentifyConfig& cfg = {})
{
    detail::require(cfg.ridge >= 0.0, errc::input, "ridge must be non-negative");
    SufficientStats stats = sufficient_statistics(data, n);
    if (cfg.ridge > 0.0) {
        stats.band.sigma[0] += cfg.ridge * Matrix::Identity(data.m, data.m);
    }
    if (!is_strictly_positive(stats.band)) {
        throw error(errc::degenerate_data, "insufficient or degenerate data: sample T_n is not positive definite");
    }
    const int period = cfg.extend_N > 0 ? cfg.extend_N : data.N;
    detail::require(period >= 2 * n + 1, errc::dimension, "fitting period must be at least 2n+1");

    MaxEntSolution sol = solve(stats.band, period, cfg.solver);
    IdentifyResult out;
    out.model = model_from_covariance(sol.covariance, n);
    out.covariance = std::move(sol.covariance);

    double diff = 0.0;
    for (int k = 0; k <= n; ++k) {
        diff = std::max(diff, (out.model.M[static_cast<std::size_t>(k)] - sol.model.M[static_cast<std::size_t>(k)]).norm());
    }
    out.diagnostics.model_route_difference = diff / std::max(sol.model.M[0].norm(), std::numeric_limits<double>::min());
    out.diagnostics.solver = std::move(sol.diagnostics);
    out.diagnostics.band_match_residual = out.diagnostics.solver.band_match_residual;
    out.diagnostics.log_likelihood = log_likelihood(out.model, stats);
    out.stats = std::move(stats);
    return out;
}

} // namespace cmx

#endif // CMX_IDENTIFY_HPP
