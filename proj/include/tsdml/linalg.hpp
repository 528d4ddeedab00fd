#ifndef TSDML_LINALG_HPP
#define TSDML_LINALG_HPP

#include <span>
#include <vector>

#include "tsdml/matrix.hpp"

namespace tsdml {

/// Least squares via Householder QR. Requires rows(X) >= cols(X) and a
/// numerically nonsingular X'X; throws NumericalError naming the estimated
/// condition number otherwise.
std::vector<double> ols_solve(const Matrix& x, std::span<const double> y);

/// Largest eigenvalue magnitude of a square matrix, via normalized repeated
/// squaring of the matrix (Gelfand limit of ||A^k||^(1/k)). Handles complex
/// dominant pairs; accurate to ~1e-10 relative on non-pathological inputs.
double spectral_radius(const Matrix& a);

/// Stationary covariance S solving S = A S A' + Q, by doubling-accelerated
/// fixed-point iteration to 1e-12. Requires spectral_radius(A) < 1.
Matrix lyapunov_solve(const Matrix& a, const Matrix& q);

/// Lower Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& a);

/// Solve A x = b for symmetric positive definite A (Cholesky).
std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);

/// Per-column centering and scaling by the population standard deviation.
/// Constant columns get scale 1 and are flagged.
class Standardizer {
public:
    static Standardizer fit(const Matrix& x);

    Matrix transform(const Matrix& x) const;
    Matrix inverse_transform(const Matrix& x) const;

    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& scales() const { return scales_; }
    const std::vector<bool>& constant_columns() const { return constant_; }

private:
    std::vector<double> means_;
    std::vector<double> scales_;
    std::vector<bool> constant_;
};

double mean(std::span<const double> v);
/// Population variance (divide by n).
double population_variance(std::span<const double> v);

} // namespace tsdml

#endif
