// Extends the scalar band (1, 0.5, 0.2) to a covariance on Z_8 and prints the
// banded inverse, the two completed lags and the smallest feasible period.

#include <cstdio>

#include "cmx/cmx.hpp"

int main()
{
    using cmx::Matrix;
    const cmx::CovBand band({Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.2)});

    const cmx::FeasibleExtension feasible = cmx::find_feasible_N(band);
    std::printf("smallest N with a positive definite AR wrap: %d\n", feasible.N);

    const cmx::MaxEntSolution sol = cmx::solve(band, 8);
    std::printf("Newton iterations: %d\n", sol.diagnostics.iterations);
    for (int k = 0; k <= 2; ++k) {
        std::printf("M_%d = %.12f\n", k, sol.model.M[static_cast<std::size_t>(k)](0, 0));
    }
    for (int k = 0; k <= 4; ++k) {
        std::printf("Sigma_%d = %.12f\n", k, sol.covariance.block(k)(0, 0));
    }
    std::printf("entropy: %.12f\n", cmx::entropy(sol.covariance));
    std::printf("off-band mass of the inverse: %.3e\n", sol.diagnostics.inverse_band_residual);
    return 0;
}
