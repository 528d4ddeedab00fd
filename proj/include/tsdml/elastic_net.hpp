#ifndef TSDML_ELASTIC_NET_HPP
#define TSDML_ELASTIC_NET_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "tsdml/matrix.hpp"

namespace tsdml {

struct PenaltySpec {
    double alpha = 0.0;    // penalty intensity, >= 0
    double l1_ratio = 1.0; // 1 = pure Lasso, 0 = ridge

    void validate() const;
};

struct FitOptions {
    double tol = 1e-7;          // max coefficient change per sweep, standardized scale
    std::size_t max_iter = 10000; // sweep budget
    // Warm start, original scale; must match the column count when present.
    const std::vector<double>* warm_start = nullptr;
    // When set, receives the penalized objective after every sweep.
    std::vector<double>* objective_trace = nullptr;
};

/// A fitted penalized linear model on the original data scale.
struct LinearFit {
    double intercept = 0.0;
    std::vector<double> coefficients;
    PenaltySpec penalty;
    std::size_t n_iterations = 0;
    bool converged = false;
    std::vector<double> fitted; // training-row predictions

    std::vector<double> predict(const Matrix& x) const;
};

/// Cyclic coordinate descent for
///   (2n)^-1 ||y - b0 - X b||^2 + alpha * (l1 ||b||_1 + (1-l1)/2 ||b||_2^2),
/// with X standardized and y centered internally; coefficients are returned
/// on the original scale and the intercept is never penalized.
LinearFit fit_elastic_net(const Matrix& x, std::span<const double> y, const PenaltySpec& penalty,
                          const FitOptions& options = {});

/// Fit the whole penalty path with one standardization pass, sweeping from
/// the largest to the smallest penalty with warm starts. Results are returned
/// in the order of `alphas`.
std::vector<LinearFit> fit_elastic_net_path(const Matrix& x, std::span<const double> y,
                                            std::span<const double> alphas, double l1_ratio,
                                            const FitOptions& options = {});

double rmse(std::span<const double> predictions, std::span<const double> truth);

/// Max stationarity-condition violation of a fit, measured on the
/// standardized problem the solver actually optimizes. Near zero at
/// convergence.
double kkt_violation(const LinearFit& fit, const Matrix& x, std::span<const double> y);

} // namespace tsdml

#endif
