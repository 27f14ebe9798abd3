#ifndef CMX_CORE_HPP
#define CMX_CORE_HPP

/** @file
 * Shared matrix aliases, error types and tolerance helpers.
 */

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmx {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Relative threshold used by every positive-definiteness test in the library.
inline constexpr double pd_rel_tol = 1e-10;

/// Imaginary residue tolerated (relative to scale) when returning to real blocks.
inline constexpr double real_residue_tol = 1e-10;

enum class errc {
    dimension,
    input,
    not_positive_definite,
    not_invertible,
    non_real_reconstruction,
    infeasible_band,
    horizon_exhausted,
    degenerate_process,
    invalid_model,
    not_a_covariance,
    not_reciprocal,
    no_convergence,
    infeasible,
    degenerate_data,
};

inline const char* to_string(errc code)
{
    switch (code) {
    case errc::dimension: return "dimension error";
    case errc::input: return "input error";
    case errc::not_positive_definite: return "not positive definite";
    case errc::not_invertible: return "not invertible";
    case errc::non_real_reconstruction: return "non-real reconstruction";
    case errc::infeasible_band: return "infeasible band";
    case errc::horizon_exhausted: return "horizon exhausted";
    case errc::degenerate_process: return "degenerate process";
    case errc::invalid_model: return "invalid model";
    case errc::not_a_covariance: return "not a covariance";
    case errc::not_reciprocal: return "not reciprocal of order n";
    case errc::no_convergence: return "no convergence";
    case errc::infeasible: return "infeasible";
    case errc::degenerate_data: return "insufficient or degenerate data";
    }
    return "unknown error";
}

/// Base exception. Every failure raised by the library carries an errc.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& detail)
        : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                            : std::string(to_string(code)) + ": " + detail),
          code_(code)
    {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

namespace detail {

inline void require(bool condition, errc code, const std::string& detail)
{
    if (!condition) {
        throw error(code, detail);
    }
}

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline double symmetry_defect(const Matrix& a)
{
    return (a - a.transpose()).norm();
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

} // namespace detail
} // namespace cmx

#endif // CMX_CORE_HPP
