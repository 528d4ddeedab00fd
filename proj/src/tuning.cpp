#include "tsdml/tuning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tsdml/linalg.hpp"

namespace tsdml {

TuningGrid TuningGrid::linspace(double lo, double hi, std::size_t count) {
    if (count < 1) throw std::invalid_argument("TuningGrid: need at least one value");
    if (count == 1) return TuningGrid{{lo}};
    if (!(hi > lo)) throw std::invalid_argument("TuningGrid: need hi > lo");
    TuningGrid grid;
    grid.lambdas.resize(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid.lambdas[i] = lo + step * static_cast<double>(i);
    grid.lambdas.back() = hi;
    return grid;
}

void TuningGrid::validate() const {
    if (lambdas.empty()) throw std::invalid_argument("TuningGrid: empty grid");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("TuningGrid: values must be strictly increasing");
    if (lambdas.size() > 2) {
        const double step0 = lambdas[1] - lambdas[0];
        const double span = lambdas.back() - lambdas.front();
        for (std::size_t i = 1; i + 1 < lambdas.size(); ++i) {
            const double step = lambdas[i + 1] - lambdas[i];
            if (std::abs(step - step0) > 1e-10 * span)
                throw std::invalid_argument("TuningGrid: values must be equally spaced");
        }
    }
}

std::string to_string(Criterion c) { return c == Criterion::rmse ? "rmse" : "goldilocks"; }

Criterion criterion_from_string(const std::string& s) {
    if (s == "rmse") return Criterion::rmse;
    if (s == "goldilocks") return Criterion::goldilocks;
    throw std::invalid_argument("unknown tuning criterion: " + s);
}

std::vector<WindowStat> window_stats(std::span<const double> rmse_curve, std::size_t S) {
    if (S < 2) throw std::invalid_argument("window_stats: need window size >= 2");
    if (rmse_curve.size() < S)
        throw std::invalid_argument("window_stats: window size exceeds grid length");
    std::vector<WindowStat> stats;
    stats.reserve(rmse_curve.size() - S + 1);
    for (std::size_t j = 0; j + S <= rmse_curve.size(); ++j) {
        const auto window = rmse_curve.subspan(j, S);
        stats.push_back({population_variance(window), mean(window)});
    }
    return stats;
}

namespace {

// Min-max normalization; a flat component contributes zero to every score.
std::vector<double> min_max_normalize(const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    std::vector<double> out(v.size(), 0.0);
    if (hi > lo)
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / (hi - lo);
    return out;
}

std::size_t argmin_first(std::span<const double> v, std::size_t begin, std::size_t end) {
    std::size_t best = begin;
    for (std::size_t i = begin + 1; i < end; ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

} // namespace

TuningTrace goldilocks_select(std::span<const double> rmse_curve, const TuningGrid& grid,
                              std::size_t S) {
    grid.validate();
    if (rmse_curve.size() != grid.size())
        throw std::invalid_argument("goldilocks_select: rmse/grid length mismatch");
    const auto stats = window_stats(rmse_curve, S);

    std::vector<double> variances(stats.size());
    std::vector<double> means(stats.size());
    for (std::size_t j = 0; j < stats.size(); ++j) {
        variances[j] = stats[j].variance;
        means[j] = stats[j].mean;
    }
    const std::vector<double> v_tilde = min_max_normalize(variances);
    const std::vector<double> r_tilde = min_max_normalize(means);

    std::size_t best_window = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < stats.size(); ++j) {
        const double score = v_tilde[j] + r_tilde[j];
        if (score < best_score) {
            best_score = score;
            best_window = j;
        }
    }

    TuningTrace trace;
    trace.grid = grid;
    trace.rmse_per_lambda.assign(rmse_curve.begin(), rmse_curve.end());
    trace.criterion = Criterion::goldilocks;
    trace.chosen_window = IndexRange{best_window, best_window + S};
    trace.chosen_index = argmin_first(rmse_curve, best_window, best_window + S);
    trace.chosen_lambda = grid.lambdas[trace.chosen_index];
    return trace;
}

TuningTrace rmse_select(std::span<const double> rmse_curve, const TuningGrid& grid) {
    grid.validate();
    if (rmse_curve.empty()) throw std::invalid_argument("rmse_select: empty rmse curve");
    if (rmse_curve.size() != grid.size())
        throw std::invalid_argument("rmse_select: rmse/grid length mismatch");
    TuningTrace trace;
    trace.grid = grid;
    trace.rmse_per_lambda.assign(rmse_curve.begin(), rmse_curve.end());
    trace.criterion = Criterion::rmse;
    trace.chosen_index = argmin_first(rmse_curve, 0, rmse_curve.size());
    trace.chosen_lambda = grid.lambdas[trace.chosen_index];
    return trace;
}

nlohmann::json to_json(const TuningTrace& trace) {
    nlohmann::json j{{"criterion", to_string(trace.criterion)},
                     {"grid", trace.grid.lambdas},
                     {"rmse_per_lambda", trace.rmse_per_lambda},
                     {"chosen_index", trace.chosen_index},
                     {"chosen_lambda", trace.chosen_lambda}};
    if (trace.chosen_window)
        j["chosen_window"] = {trace.chosen_window->begin, trace.chosen_window->end};
    return j;
}

} // namespace tsdml
