#ifndef TSDML_TUNING_HPP
#define TSDML_TUNING_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsdml/folds.hpp"

namespace tsdml {

/// Strictly increasing, equally spaced penalty grid.
struct TuningGrid {
    std::vector<double> lambdas;

    static TuningGrid linspace(double lo, double hi, std::size_t count);
    void validate() const;
    std::size_t size() const { return lambdas.size(); }
};

enum class Criterion { rmse, goldilocks };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct WindowStat {
    double variance = 0.0; // population variance over the window
    double mean = 0.0;
};

/// Per-window mean and population variance of the RMSE curve, windows of S
/// adjacent grid points.
std::vector<WindowStat> window_stats(std::span<const double> rmse_curve, std::size_t S);

struct TuningTrace {
    TuningGrid grid;
    std::vector<double> rmse_per_lambda;
    std::optional<IndexRange> chosen_window; // grid-index range, goldilocks only
    std::size_t chosen_index = 0;
    double chosen_lambda = 0.0;
    Criterion criterion = Criterion::rmse;
};

/// Pick the window minimizing the sum of min-max normalized local variance
/// and local mean RMSE, then the RMSE minimizer inside it. Ties break toward
/// the smallest window index and smallest lambda.
TuningTrace goldilocks_select(std::span<const double> rmse_curve, const TuningGrid& grid,
                              std::size_t S);

/// Standard predictive selection: global RMSE minimizer, ties to smallest
/// lambda.
TuningTrace rmse_select(std::span<const double> rmse_curve, const TuningGrid& grid);

nlohmann::json to_json(const TuningTrace& trace);

} // namespace tsdml

#endif
