#ifndef TSDML_ESTIMATOR_HPP
#define TSDML_ESTIMATOR_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsdml/dataset.hpp"
#include "tsdml/elastic_net.hpp"
#include "tsdml/folds.hpp"
#include "tsdml/tuning.hpp"

namespace tsdml {

struct EstimatorOptions {
    std::size_t K = 8;
    Scheme scheme = Scheme::rcf;
    Criterion criterion = Criterion::goldilocks;
    // Grid values are applied in units of each nuisance target's standard
    // deviation, so one grid serves outcome and policy regressions alike.
    TuningGrid grid = TuningGrid::linspace(0.1, 1.0, 10);
    double l1_ratio = 1.0;
    std::optional<std::size_t> bandwidth; // HAC lags; defaults to floor(1.3 T^(1/4))
    std::size_t window = 3;               // stability-window size
    double tol = 1e-7;
    std::size_t max_iter = 10000;
};

/// Stacked, time-ordered residual pairs across all folds.
struct ScoreSeries {
    std::vector<double> chi; // residualized outcome
    std::vector<double> xi;  // residualized policy
    std::vector<std::size_t> fold_of_t;
    double theta_hat = std::numeric_limits<double>::quiet_NaN();

    std::size_t length() const { return chi.size(); }
    std::vector<double> scores() const;
};

struct NuisanceDiagnostics {
    TuningTrace trace;
    LinearFit chosen_fit;
    bool converged = true;       // chosen fit converged
    std::size_t n_not_converged = 0; // fits along the path that hit max_iter
};

struct CrossfitResult {
    ScoreSeries scores;
    // Per fold: [0] policy nuisance, [1] outcome nuisance.
    std::vector<std::array<NuisanceDiagnostics, 2>> diagnostics;
    bool all_converged = true;
};

CrossfitResult crossfit_residualize(const TimeSeriesDataset& data, const FoldPlan& plan,
                                    const EstimatorOptions& options);

/// Residual-on-residual slope on one block; throws on degenerate policy
/// residuals.
double fold_theta(std::span<const double> chi, std::span<const double> xi);

struct HacResult {
    double a_hat = 0.0;
    double sigma_hat = 0.0;
    double se = 0.0;
    std::size_t bandwidth = 0;
};

/// Bartlett-kernel long-run variance of the stacked score process and the
/// resulting standard error of theta_hat.
HacResult hac_inference(const ScoreSeries& scores, std::optional<std::size_t> bandwidth);

std::size_t default_bandwidth(std::size_t T);

struct EstimateReport {
    double theta_hat = 0.0;
    std::vector<double> per_fold_thetas;
    double se = 0.0;
    std::array<double, 2> ci95{0.0, 0.0};
    double a_hat = 0.0;
    double sigma_hat = 0.0;
    std::size_t bandwidth_used = 0;
    std::vector<std::array<NuisanceDiagnostics, 2>> tuning_traces;
    bool all_converged = true;
    std::size_t T = 0;
    std::size_t K = 0;
    Scheme scheme = Scheme::rcf;
    Criterion criterion = Criterion::rmse;

    nlohmann::json to_json(bool include_traces = true) const;
};

EstimateReport estimate(const TimeSeriesDataset& data, const EstimatorOptions& options);
EstimateReport estimate_with_plan(const TimeSeriesDataset& data, const FoldPlan& plan,
                                  const EstimatorOptions& options);

struct LpReport {
    std::size_t horizons = 0; // H; rows cover h = 0..H
    std::vector<double> theta_h;
    std::vector<double> se_h;
    std::vector<double> cumulative_theta;
    std::vector<std::array<double, 2>> cumulative_ci;
    std::vector<std::size_t> bandwidth_h;
    std::vector<double> per_fold_theta0; // fold thetas at h = 0
    bool all_converged = true;
    // Cumulative bands add per-horizon variances; cross-horizon covariance is
    // not tracked.
    static constexpr const char* kCumulativeNote =
        "cumulative intervals sum per-horizon variances (cross-horizon covariance ignored)";

    nlohmann::json to_json() const;
    std::string irf_csv() const;
};

LpReport estimate_lp(const TimeSeriesDataset& data, const EstimatorOptions& options,
                     std::size_t H);

} // namespace tsdml

#endif
