#ifndef CMX_MAXENT_HPP
#define CMX_MAXENT_HPP

/** @file
 * Maximum-entropy band extension on Z_N.
 *
 * Given Sigma_0..Sigma_n, find the symmetric positive definite block circulant
 * Sigma_N whose first n+1 lags are the data and whose log det is maximal.  The
 * optimum has a banded inverse M_N of bandwidth n, so the solver works directly
 * on banded symmetric circulants M and minimizes the dual
 *
 *     f(M) = <M, C> - log det M,
 *
 * where C is any circulant completion of the band (only the band enters the
 * pairing because M is banded).  The gradient in the banded subspace is the
 * band of C - M^{-1}: f is stationary exactly when the band of M^{-1} equals the
 * data, and then Sigma_N = M^{-1}.
 *
 * Frequency-domain expressions give the Hessian in closed form, so the solver
 * is a damped Newton method with a positivity-guarded Armijo line search.
 * Very large coefficient spaces fall back to gradient descent with
 * Barzilai-Borwein trial steps and the same line search.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmx/blockcirc.hpp"
#include "cmx/core.hpp"
#include "cmx/feasibility.hpp"
#include "cmx/parallel.hpp"
#include "cmx/reciprocal.hpp"

namespace cmx {

struct SolverConfig {
    double grad_tol = 1e-10;
    int max_iter = 200;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double pd_guard = pd_rel_tol;
    /// Largest coefficient-space dimension (n+1)m^2 handled by Newton steps.
    int newton_max_dim = 2000;

    void validate() const
    {
        detail::require(grad_tol > 0.0 && max_iter > 0 && armijo_c > 0.0 && armijo_c < 1.0 &&
                            backtrack_factor > 0.0 && backtrack_factor < 1.0 && pd_guard > 0.0,
                        errc::input, "invalid solver configuration");
    }
};

/// One accepted iterate.
struct DualState {
    BandedCirculant M;
    double objective = 0.0;
    double grad_norm = 0.0;
    int iteration = 0;
};

/// Evidence gathered when the solver cannot reach a stationary point.
struct InfeasibilityCertificate {
    std::string reason;
    /// <D, C> for the normalized last iterate D = M/||M||; negative with D >= 0 certifies infeasibility.
    double ray_pairing = 0.0;
    double ray_min_eigenvalue = 0.0;
    /// AR-wrap test at the requested N.
    bool wrap_positive_definite = false;
    double wrap_min_eigenvalue = 0.0;
    /// Smallest N with a positive definite AR wrap, or -1 if none within the default horizon.
    int smallest_feasible_N = -1;
};

struct SolverDiagnostics {
    std::string status = "not_started"; ///< converged | no_convergence | infeasible
    std::string method = "newton";
    int iterations = 0;
    std::vector<double> objective;
    std::vector<double> grad_norm;
    std::vector<double> step;
    double relative_grad_norm = 0.0;
    double band_match_residual = 0.0;
    double inverse_band_residual = 0.0;
    std::optional<InfeasibilityCertificate> certificate;
};

struct MaxEntSolution {
    BlockCirculant covariance; ///< Sigma_N, the maximum-entropy completion
    ReciprocalModel model;     ///< its banded inverse
    DualState state;
    SolverDiagnostics diagnostics;
};

class solver_error : public error {
public:
    solver_error(errc code, const std::string& detail, SolverDiagnostics diagnostics)
        : error(code, detail), diagnostics_(std::move(diagnostics))
    {}

    const SolverDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    SolverDiagnostics diagnostics_;
};

namespace detail {

// Coefficient layout: upper triangle of M_0, then every entry of M_1..M_n.
class BandCoordinates {
public:
    BandCoordinates(int m, int n, int N) : m_(m), n_(n), N_(N)
    {
        for (int p = 0; p < m; ++p) {
            for (int q = p; q < m; ++q) {
                slots_.push_back({0, p, q});
            }
        }
        for (int k = 1; k <= n; ++k) {
            for (int p = 0; p < m; ++p) {
                for (int q = 0; q < m; ++q) {
                    slots_.push_back({k, p, q});
                }
            }
        }
    }

    struct Slot {
        int lag;
        int row;
        int col;
    };

    int size() const { return static_cast<int>(slots_.size()); }
    const Slot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }

    Vector pack(const BandedCirculant& b) const
    {
        Vector x(size());
        for (int i = 0; i < size(); ++i) {
            const Slot& s = slot(i);
            x(i) = b.blocks[static_cast<std::size_t>(s.lag)](s.row, s.col);
        }
        return x;
    }

    BandedCirculant unpack(const Vector& x) const
    {
        std::vector<Matrix> blocks(static_cast<std::size_t>(n_ + 1), Matrix::Zero(m_, m_));
        for (int i = 0; i < size(); ++i) {
            const Slot& s = slot(i);
            blocks[static_cast<std::size_t>(s.lag)](s.row, s.col) = x(i);
            if (s.lag == 0) {
                blocks[0](s.col, s.row) = x(i);
            }
        }
        return BandedCirculant(N_, std::move(blocks));
    }

    /// Derivative of f with respect to each coefficient, given the band gradient blocks G_k.
    Vector coefficient_gradient(const BandedCirculant& g) const
    {
        Vector out(size());
        const double count = static_cast<double>(N_);
        for (int i = 0; i < size(); ++i) {
            const Slot& s = slot(i);
            const Matrix& b = g.blocks[static_cast<std::size_t>(s.lag)];
            if (s.lag == 0) {
                out(i) = s.row == s.col ? count * b(s.row, s.row) : count * (b(s.row, s.col) + b(s.col, s.row));
            } else {
                out(i) = 2.0 * count * b(s.row, s.col);
            }
        }
        return out;
    }

private:
    int m_;
    int n_;
    int N_;
    std::vector<Slot> slots_;
};

// f, M^{-1} and the inverse frequency blocks at one banded M.
struct DualEvaluation {
    bool positive_definite = false;
    double min_eigenvalue = 0.0;
    double objective = 0.0;
    std::vector<CMatrix> inv_psi; // l = 0..floor(N/2)
    BlockCirculant inverse;
};

inline double band_pairing(const BandedCirculant& M, const CovBand& band)
{
    return inner(M, BandedCirculant(M.N, band.sigma));
}

inline DualEvaluation evaluate_dual(const BandedCirculant& M, const CovBand& band, double pd_guard,
                                    bool want_inverse)
{
    DualEvaluation out;
    const SpectralForm s = dft_block_diagonalize(M.assemble());
    const int count = s.N();
    const int half = count / 2;
    std::vector<Vector> values(static_cast<std::size_t>(half + 1));
    std::vector<CMatrix> vectors(static_cast<std::size_t>(half + 1));
    parallel_for(static_cast<std::size_t>(half + 1), static_cast<std::size_t>(M.m() * M.m() * M.m() * 16),
                 [&](std::size_t l) {
                     const CMatrix herm = 0.5 * (s.psi[l] + s.psi[l].adjoint());
                     Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
                     values[l] = eig.eigenvalues();
                     vectors[l] = eig.eigenvectors();
                 });
    double min_eig = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (const auto& v : values) {
        min_eig = std::min(min_eig, v.minCoeff());
        max_abs = std::max(max_abs, v.cwiseAbs().maxCoeff());
    }
    out.min_eigenvalue = min_eig;
    out.positive_definite = min_eig > pd_guard * (1.0 + max_abs);
    if (!out.positive_definite) {
        return out;
    }
    double log_det = 0.0;
    for (int l = 0; l < count; ++l) {
        const int mirror = l <= half ? l : count - l;
        log_det += values[static_cast<std::size_t>(mirror)].array().log().sum();
    }
    out.objective = band_pairing(M, band) - log_det;
    if (want_inverse) {
        out.inv_psi.resize(static_cast<std::size_t>(half + 1));
        SpectralForm inv;
        inv.psi.resize(static_cast<std::size_t>(count));
        for (int l = 0; l <= half; ++l) {
            const auto& u = vectors[static_cast<std::size_t>(l)];
            out.inv_psi[static_cast<std::size_t>(l)] =
                u * values[static_cast<std::size_t>(l)].cwiseInverse().asDiagonal() * u.adjoint();
            inv.psi[static_cast<std::size_t>(l)] = out.inv_psi[static_cast<std::size_t>(l)];
        }
        for (int l = half + 1; l < count; ++l) {
            inv.psi[static_cast<std::size_t>(l)] = inv.psi[static_cast<std::size_t>(count - l)].conjugate();
        }
        out.inverse = idft_reconstruct(inv);
    }
    return out;
}

// Band of C - M^{-1}.
inline BandedCirculant band_gradient(const BlockCirculant& inverse, const CovBand& band, int N)
{
    std::vector<Matrix> blocks(band.sigma.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        blocks[k] = band.sigma[k] - inverse.first_col[k];
    }
    blocks[0] = symmetrized(blocks[0]);
    return BandedCirculant(N, std::move(blocks));
}

/**
 * Hessian of -log det M_N in band coordinates:
 *     H_ab = sum_l Re Tr(P_l E_a(l) P_l E_b(l)),  P_l = Psi_l(M)^{-1},
 * where E_a(l) = dPsi_l/dx_a is a sum of at most two phase-weighted unit
 * outer products.
 */
inline Matrix dual_hessian(const BandCoordinates& coords, const std::vector<CMatrix>& inv_psi, int N)
{
    struct Term {
        Complex coef;
        int row;
        int col;
    };
    const int dim = coords.size();
    const int half = N / 2;
    Matrix hessian = Matrix::Zero(dim, dim);
    std::vector<std::vector<Term>> terms(static_cast<std::size_t>(dim));
    for (int l = 0; l <= half; ++l) {
        const double weight = (l == 0 || (N % 2 == 0 && l == half)) ? 1.0 : 2.0;
        const CMatrix& P = inv_psi[static_cast<std::size_t>(l)];
        for (int a = 0; a < dim; ++a) {
            const auto& s = coords.slot(a);
            auto& t = terms[static_cast<std::size_t>(a)];
            t.clear();
            if (s.lag == 0) {
                t.push_back({Complex(1.0, 0.0), s.row, s.col});
                if (s.row != s.col) {
                    t.push_back({Complex(1.0, 0.0), s.col, s.row});
                }
            } else {
                const double phase = 2.0 * std::numbers::pi * static_cast<double>(l) * s.lag / N;
                const Complex w(std::cos(phase), std::sin(phase));
                t.push_back({w, s.row, s.col});
                t.push_back({std::conj(w), s.col, s.row});
            }
        }
        for (int a = 0; a < dim; ++a) {
            for (int b = a; b < dim; ++b) {
                Complex acc(0.0, 0.0);
                for (const Term& ta : terms[static_cast<std::size_t>(a)]) {
                    for (const Term& tb : terms[static_cast<std::size_t>(b)]) {
                        // Tr(P e_r e_c^T P e_r' e_c'^T) = P(c, r') P(c', r)
                        acc += ta.coef * tb.coef * P(ta.col, tb.row) * P(tb.col, ta.row);
                    }
                }
                hessian(a, b) += weight * acc.real();
            }
        }
    }
    return hessian.selfadjointView<Eigen::Upper>();
}

inline double relative_norm(const BandedCirculant& g, const CovBand& band)
{
    return g.frobenius_norm() / (1.0 + BandedCirculant(g.N, band.sigma).frobenius_norm());
}

inline double band_match(const BlockCirculant& inverse, const CovBand& band)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < band.sigma.size(); ++k) {
        worst = std::max(worst, (band.sigma[k] - inverse.first_col[k]).norm());
    }
    return worst / std::max(band.sigma[0].norm(), std::numeric_limits<double>::min());
}

} // namespace detail

/// f(M) = <M, C> - log det M for a banded symmetric positive definite M.
inline double dual_objective(const BandedCirculant& M, const CovBand& band)
{
    band.validate();
    detail::require(M.m() == band.m() && M.n() == band.n(), errc::dimension, "M and band differ in shape");
    const auto eval = detail::evaluate_dual(M, band, pd_rel_tol, false);
    if (!eval.positive_definite) {
        throw error(errc::not_positive_definite, "dual variable is not positive definite");
    }
    return eval.objective;
}

/**
 * Gradient of the dual in the banded subspace: blocks Sigma_k - (M^{-1})_k.
 * With the trace inner product of assembled matrices, <grad, dM> is the
 * directional derivative of f along any banded symmetric dM.
 */
inline BandedCirculant dual_gradient(const BandedCirculant& M, const CovBand& band)
{
    band.validate();
    detail::require(M.m() == band.m() && M.n() == band.n(), errc::dimension, "M and band differ in shape");
    const auto eval = detail::evaluate_dual(M, band, pd_rel_tol, true);
    if (!eval.positive_definite) {
        throw error(errc::not_positive_definite, "dual variable is not positive definite");
    }
    return detail::band_gradient(eval.inverse, band, M.N);
}

/// Gaussian differential entropy 1/2 log det C + 1/2 mN (1 + log 2 pi).
inline double entropy(const BlockCirculant& c)
{
    const double dim = static_cast<double>(c.m()) * c.N();
    return 0.5 * logdet(c) + 0.5 * dim * (1.0 + std::log(2.0 * std::numbers::pi));
}

/// Starting point Circ{Sigma_0^{-1}/2, 0, ..., 0}.
inline BandedCirculant default_initial_point(const CovBand& band, int N)
{
    std::vector<Matrix> blocks(band.sigma.size(), Matrix::Zero(band.m(), band.m()));
    blocks[0] = detail::symmetrized(0.5 * band.sigma[0].ldlt().solve(Matrix::Identity(band.m(), band.m())));
    return BandedCirculant(N, std::move(blocks));
}

namespace detail {

inline InfeasibilityCertificate certify(const BandedCirculant& M, const CovBand& band, int N, std::string reason)
{
    InfeasibilityCertificate cert;
    cert.reason = std::move(reason);
    const double norm = M.frobenius_norm();
    if (norm > 0.0) {
        BandedCirculant ray = M;
        for (auto& b : ray.blocks) {
            b /= norm;
        }
        cert.ray_pairing = band_pairing(ray, band);
        cert.ray_min_eigenvalue = spectral_check(ray.assemble()).min_eigenvalue;
    }
    const LevinsonResult lev = block_levinson(band);
    const SpectralCheck wrap = spectral_check(wrap_ar_extension(band, lev, N));
    cert.wrap_positive_definite = wrap.positive_definite;
    cert.wrap_min_eigenvalue = wrap.min_eigenvalue;
    try {
        cert.smallest_feasible_N = find_feasible_N(band).N;
    } catch (const horizon_exhausted_error&) {
        cert.smallest_feasible_N = -1;
    }
    return cert;
}

} // namespace detail

/// Maximum-entropy completion starting from a given banded positive definite M.
inline MaxEntSolution solve(const CovBand& band, int N, const BandedCirculant& initial, const SolverConfig& cfg)
{
    band.validate();
    cfg.validate();
    detail::require(N >= 2 * band.n() + 1, errc::dimension,
                    "N = " + std::to_string(N) + " < 2n+1 = " + std::to_string(2 * band.n() + 1));
    detail::require(initial.N == N && initial.m() == band.m() && initial.n() == band.n(), errc::dimension,
                    "initial point does not match the band");
    block_levinson(band); // throws infeasible_band unless T_n > 0

    const detail::BandCoordinates coords(band.m(), band.n(), N);
    const bool newton = coords.size() <= cfg.newton_max_dim;
    SolverDiagnostics diag;
    diag.method = newton ? "newton" : "gradient";

    Vector x = coords.pack(initial);
    BandedCirculant M = coords.unpack(x);
    detail::DualEvaluation eval = detail::evaluate_dual(M, band, cfg.pd_guard, true);
    if (!eval.positive_definite) {
        throw error(errc::input, "initial point is not positive definite");
    }
    const double initial_norm = M.frobenius_norm();

    BandedCirculant grad = detail::band_gradient(eval.inverse, band, N);
    Vector g = coords.coefficient_gradient(grad);
    Vector prev_x;
    Vector prev_g;

    auto record = [&](double step) {
        diag.objective.push_back(eval.objective);
        diag.grad_norm.push_back(grad.frobenius_norm());
        diag.step.push_back(step);
    };
    record(0.0);

    auto finish = [&](std::string status) {
        diag.status = std::move(status);
        diag.relative_grad_norm = detail::relative_norm(grad, band);
        diag.band_match_residual = detail::band_match(eval.inverse, band);
        return diag;
    };

    std::string failure;
    for (int iter = 0;; ++iter) {
        diag.iterations = iter;
        const double rel = detail::relative_norm(grad, band);
        if (rel <= cfg.grad_tol && detail::band_match(eval.inverse, band) <= 10.0 * cfg.grad_tol) {
            break;
        }
        if (iter >= cfg.max_iter) {
            failure = "iteration_limit";
            break;
        }
        if (M.frobenius_norm() > 1e12 * initial_norm) {
            failure = "divergence";
            break;
        }

        Vector direction;
        if (newton) {
            const Matrix hessian = detail::dual_hessian(coords, eval.inv_psi, N);
            Eigen::LLT<Matrix> llt(hessian);
            if (llt.info() == Eigen::Success) {
                direction = -llt.solve(g);
            } else {
                direction = -hessian.ldlt().solve(g);
            }
            if (!direction.allFinite() || direction.dot(g) >= 0.0) {
                direction = -g;
            }
        } else {
            double alpha = 1.0 / std::max(g.norm(), 1e-300) * std::max(x.norm(), 1e-300);
            if (prev_x.size() == x.size()) {
                const Vector s = x - prev_x;
                const Vector y = g - prev_g;
                const double sy = s.dot(y);
                if (sy > 0.0) {
                    alpha = s.squaredNorm() / sy;
                }
            }
            direction = -alpha * g;
        }

        const double slope = g.dot(direction);
        const double f0 = eval.objective;
        const double g0 = grad.frobenius_norm();
        double t = 1.0;
        bool accepted = false;
        while (t >= 1e-14) {
            const Vector trial_x = x + t * direction;
            const BandedCirculant trial_M = coords.unpack(trial_x);
            detail::DualEvaluation trial = detail::evaluate_dual(trial_M, band, cfg.pd_guard, true);
            if (trial.positive_definite) {
                const bool armijo = trial.objective <= f0 + cfg.armijo_c * t * slope;
                bool flat_progress = false;
                if (!armijo && trial.objective <= f0 + 1e-13 * (1.0 + std::abs(f0))) {
                    // f no longer resolves the step; accept if the gradient shrinks.
                    const BandedCirculant trial_grad = detail::band_gradient(trial.inverse, band, N);
                    flat_progress = trial_grad.frobenius_norm() < g0;
                }
                if (armijo || flat_progress) {
                    prev_x = x;
                    prev_g = g;
                    x = trial_x;
                    M = trial_M;
                    eval = std::move(trial);
                    grad = detail::band_gradient(eval.inverse, band, N);
                    g = coords.coefficient_gradient(grad);
                    accepted = true;
                    break;
                }
            }
            t *= cfg.backtrack_factor;
        }
        if (!accepted) {
            failure = "line_search_collapse";
            break;
        }
        record(t);
    }

    if (!failure.empty()) {
        InfeasibilityCertificate cert = detail::certify(M, band, N, failure);
        const bool ray_certifies = cert.ray_pairing < 0.0 && cert.ray_min_eigenvalue > -1e-8;
        const bool infeasible = !cert.wrap_positive_definite && (failure != "iteration_limit" || ray_certifies);
        diag.certificate = cert;
        finish(infeasible ? "infeasible" : "no_convergence");
        throw solver_error(infeasible ? errc::infeasible : errc::no_convergence,
                           failure + " after " + std::to_string(diag.iterations) + " iterations", diag);
    }

    finish("converged");
    MaxEntSolution out;
    out.covariance = eval.inverse;
    // Exact band copy: the stationary point matches it to grad_tol.
    out.model = ReciprocalModel(N, M.blocks);
    out.diagnostics = diag;
    out.diagnostics.inverse_band_residual = band_residual(inverse(out.covariance), band.n());
    out.state = DualState{M, eval.objective, grad.frobenius_norm(), diag.iterations};
    return out;
}

/// Maximum-entropy completion of the band on Z_N from the default starting point.
inline MaxEntSolution solve(const CovBand& band, int N, const SolverConfig& cfg = {})
{
    band.validate();
    detail::require(N >= 2 * band.n() + 1, errc::dimension,
                    "N = " + std::to_string(N) + " < 2n+1 = " + std::to_string(2 * band.n() + 1));
    return solve(band, N, default_initial_point(band, N), cfg);
}

} // namespace cmx

#endif // CMX_MAXENT_HPP
