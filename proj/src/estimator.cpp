#include "tsdml/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tsdml/errors.hpp"
#include "tsdml/linalg.hpp"

namespace tsdml {

std::vector<double> ScoreSeries::scores() const {
    std::vector<double> s(chi.size());
    for (std::size_t t = 0; t < chi.size(); ++t) s[t] = xi[t] * (chi[t] - theta_hat * xi[t]);
    return s;
}

namespace {

// Dataset row indices used for training, honoring the fold direction:
// reversed folds present the auxiliary sample in reversed time order.
std::vector<std::size_t> training_rows(const Fold& fold) {
    std::vector<std::size_t> rows;
    rows.reserve(fold.auxiliary_size);
    for (const auto& range : fold.auxiliary)
        for (std::size_t t = range.begin; t < range.end; ++t) rows.push_back(t);
    if (fold.direction == Direction::reversed) std::reverse(rows.begin(), rows.end());
    return rows;
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = x.row(rows[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& rows,
                           std::size_t shift = 0) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i] + shift];
    return out;
}

struct TunedNuisance {
    NuisanceDiagnostics diagnostics;
    std::vector<double> main_predictions;
};

// Fit the penalty path on the auxiliary sample, score every candidate on the
// main block, and keep the fit the criterion selects. Grid values are
// interpreted in units of the training target's standard deviation, so the
// same grid spans light-to-full shrinkage whatever the target's scale.
TunedNuisance tune_nuisance(const Matrix& x_aux, const std::vector<double>& y_aux,
                            const Matrix& x_main, const std::vector<double>& y_main,
                            const TuningGrid& grid, const EstimatorOptions& options) {
    FitOptions fit_options;
    fit_options.tol = options.tol;
    fit_options.max_iter = options.max_iter;
    const double target_scale =
        std::max(std::sqrt(population_variance(y_aux)), std::numeric_limits<double>::min());
    std::vector<double> penalties = grid.lambdas;
    for (double& a : penalties) a *= target_scale;
    const auto fits =
        fit_elastic_net_path(x_aux, y_aux, penalties, options.l1_ratio, fit_options);

    const std::size_t m = fits.size();
    std::vector<double> rmse_curve(m);
    std::vector<std::vector<double>> predictions(m);
    std::size_t not_converged = 0;
    for (std::size_t i = 0; i < m; ++i) {
        predictions[i] = fits[i].predict(x_main);
        rmse_curve[i] = rmse(predictions[i], y_main);
        if (!fits[i].converged) ++not_converged;
    }

    TunedNuisance out;
    out.diagnostics.trace = options.criterion == Criterion::goldilocks
                                ? goldilocks_select(rmse_curve, grid, options.window)
                                : rmse_select(rmse_curve, grid);
    const std::size_t chosen = out.diagnostics.trace.chosen_index;
    out.diagnostics.chosen_fit = fits[chosen];
    out.diagnostics.converged = fits[chosen].converged;
    out.diagnostics.n_not_converged = not_converged;
    out.main_predictions = std::move(predictions[chosen]);
    return out;
}

void check_plan(const TimeSeriesDataset& data, const FoldPlan& plan) {
    if (plan.T != data.T())
        throw std::invalid_argument("fold plan length does not match dataset length");
    for (const auto& fold : plan.folds)
        if (fold.auxiliary_size == 0)
            throw NumericalError("crossfit: fold with empty auxiliary set");
}

} // namespace

CrossfitResult crossfit_residualize(const TimeSeriesDataset& data, const FoldPlan& plan,
                                    const EstimatorOptions& options) {
    options.grid.validate();
    check_plan(data, plan);
    const std::size_t T = data.T();
    const Matrix controls = data.controls();
    const std::vector<double>& outcome = data.outcome();
    const std::vector<double>& policy = data.policy();

    CrossfitResult result;
    result.scores.chi.assign(T, 0.0);
    result.scores.xi.assign(T, 0.0);
    result.scores.fold_of_t.assign(T, 0);
    result.diagnostics.resize(plan.folds.size());

    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
        const Fold& fold = plan.folds[k];
        const std::vector<std::size_t> aux_rows = training_rows(fold);
        std::vector<std::size_t> main_rows;
        main_rows.reserve(fold.main.size());
        for (std::size_t t = fold.main.begin; t < fold.main.end; ++t) main_rows.push_back(t);

        const Matrix x_aux = gather_rows(controls, aux_rows);
        const Matrix x_main = gather_rows(controls, main_rows);

        TunedNuisance m_hat = tune_nuisance(x_aux, gather(policy, aux_rows), x_main,
                                            gather(policy, main_rows), options.grid, options);
        TunedNuisance g_hat = tune_nuisance(x_aux, gather(outcome, aux_rows), x_main,
                                            gather(outcome, main_rows), options.grid, options);

        for (std::size_t i = 0; i < main_rows.size(); ++i) {
            const std::size_t t = main_rows[i];
            result.scores.xi[t] = policy[t] - m_hat.main_predictions[i];
            result.scores.chi[t] = outcome[t] - g_hat.main_predictions[i];
            result.scores.fold_of_t[t] = k;
            if (!std::isfinite(result.scores.xi[t]) || !std::isfinite(result.scores.chi[t]))
                throw NumericalError("crossfit: non-finite residual in fold " +
                                     std::to_string(k + 1));
        }
        result.diagnostics[k] = {std::move(m_hat.diagnostics), std::move(g_hat.diagnostics)};
        if (!result.diagnostics[k][0].converged || !result.diagnostics[k][1].converged)
            result.all_converged = false;
    }
    return result;
}

double fold_theta(std::span<const double> chi, std::span<const double> xi) {
    if (chi.size() != xi.size() || chi.empty())
        throw std::invalid_argument("fold_theta: length mismatch or empty block");
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t t = 0; t < xi.size(); ++t) {
        sxx += xi[t] * xi[t];
        sxy += xi[t] * chi[t];
    }
    if (sxx < 1e-10 * static_cast<double>(xi.size()))
        throw NumericalError("fold_theta: weak residualization, sum xi^2 = " +
                             std::to_string(sxx));
    return sxy / sxx;
}

std::size_t default_bandwidth(std::size_t T) {
    const auto h = static_cast<std::size_t>(std::floor(1.3 * std::pow(static_cast<double>(T), 0.25)));
    return std::min(h, T - 1);
}

HacResult hac_inference(const ScoreSeries& scores, std::optional<std::size_t> bandwidth) {
    const std::size_t T = scores.length();
    if (T < 4) throw std::invalid_argument("hac_inference: need T >= 4");
    if (!std::isfinite(scores.theta_hat))
        throw std::invalid_argument("hac_inference: theta_hat not set");
    const std::size_t H = bandwidth ? *bandwidth : default_bandwidth(T);
    if (H >= T) throw std::invalid_argument("hac_inference: bandwidth must be < T");

    const std::vector<double> s = scores.scores();
    const double s_bar = mean(s);

    auto gamma = [&](std::size_t h) {
        double acc = 0.0;
        for (std::size_t t = h; t < T; ++t) acc += (s[t] - s_bar) * (s[t - h] - s_bar);
        return acc / static_cast<double>(T);
    };

    const double gamma0 = gamma(0);
    double sigma = gamma0;
    for (std::size_t h = 1; h <= H; ++h) {
        const double weight = 1.0 - static_cast<double>(h) / static_cast<double>(H);
        sigma += 2.0 * weight * gamma(h);
    }
    if (sigma <= 0.0) sigma = std::max(1e-12 * gamma0, 1e-300);

    double a_hat = 0.0;
    for (double x : scores.xi) a_hat += x * x;
    a_hat /= static_cast<double>(T);
    if (!(a_hat > 0.0)) throw NumericalError("hac_inference: degenerate Jacobian estimate");

    HacResult res;
    res.a_hat = a_hat;
    res.sigma_hat = sigma;
    res.bandwidth = H;
    res.se = std::sqrt(sigma / (a_hat * a_hat * static_cast<double>(T)));
    return res;
}

EstimateReport estimate(const TimeSeriesDataset& data, const EstimatorOptions& options) {
    const BlockPartition part = partition(data.T(), options.K);
    const FoldPlan plan = options.scheme == Scheme::rcf ? rcf_plan(part) : nlo_plan(part);
    return estimate_with_plan(data, plan, options);
}

EstimateReport estimate_with_plan(const TimeSeriesDataset& data, const FoldPlan& plan,
                                  const EstimatorOptions& options) {
    CrossfitResult crossfit = crossfit_residualize(data, plan, options);
    ScoreSeries& scores = crossfit.scores;

    std::vector<double> fold_thetas;
    fold_thetas.reserve(plan.folds.size());
    for (const auto& fold : plan.folds) {
        const std::span<const double> chi{scores.chi.data() + fold.main.begin, fold.main.size()};
        const std::span<const double> xi{scores.xi.data() + fold.main.begin, fold.main.size()};
        fold_thetas.push_back(fold_theta(chi, xi));
    }
    scores.theta_hat = mean(fold_thetas);

    const HacResult hac = hac_inference(scores, options.bandwidth);

    EstimateReport report;
    report.theta_hat = scores.theta_hat;
    report.per_fold_thetas = std::move(fold_thetas);
    report.se = hac.se;
    report.ci95 = {report.theta_hat - 1.96 * hac.se, report.theta_hat + 1.96 * hac.se};
    report.a_hat = hac.a_hat;
    report.sigma_hat = hac.sigma_hat;
    report.bandwidth_used = hac.bandwidth;
    report.tuning_traces = std::move(crossfit.diagnostics);
    report.all_converged = crossfit.all_converged;
    report.T = data.T();
    report.K = plan.K;
    report.scheme = plan.scheme;
    report.criterion = options.criterion;
    return report;
}

LpReport estimate_lp(const TimeSeriesDataset& data, const EstimatorOptions& options,
                     std::size_t H) {
    const std::size_t T = data.T();
    const BlockPartition part = partition(T, options.K);
    if (H >= T / options.K)
        throw std::invalid_argument(
            "estimate_lp: horizon too large; every fold needs a main-block row with t+h in "
            "sample");
    const FoldPlan plan = options.scheme == Scheme::rcf ? rcf_plan(part) : nlo_plan(part);
    options.grid.validate();
    check_plan(data, plan);

    const Matrix controls = data.controls();
    const std::vector<double>& outcome = data.outcome();
    const std::vector<double>& policy = data.policy();

    // Policy residual: computed once from the full-sample fold plan.
    std::vector<double> xi(T, 0.0);
    std::vector<std::size_t> fold_of_t(T, 0);
    bool all_converged = true;
    std::vector<std::vector<std::size_t>> aux_rows_per_fold(plan.folds.size());
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
        const Fold& fold = plan.folds[k];
        aux_rows_per_fold[k] = training_rows(fold);
        std::vector<std::size_t> main_rows;
        for (std::size_t t = fold.main.begin; t < fold.main.end; ++t) main_rows.push_back(t);
        const Matrix x_aux = gather_rows(controls, aux_rows_per_fold[k]);
        const Matrix x_main = gather_rows(controls, main_rows);
        TunedNuisance m_hat = tune_nuisance(x_aux, gather(policy, aux_rows_per_fold[k]), x_main,
                                            gather(policy, main_rows), options.grid, options);
        if (!m_hat.diagnostics.converged) all_converged = false;
        for (std::size_t i = 0; i < main_rows.size(); ++i) {
            xi[main_rows[i]] = policy[main_rows[i]] - m_hat.main_predictions[i];
            fold_of_t[main_rows[i]] = k;
        }
    }

    LpReport report;
    report.horizons = H;
    double cumulative = 0.0;
    double cumulative_var = 0.0;
    for (std::size_t h = 0; h <= H; ++h) {
        const std::size_t usable = T - h; // rows with t + h in sample
        std::vector<double> chi_h(usable, 0.0);
        std::vector<double> fold_thetas(plan.folds.size(), 0.0);

        for (std::size_t k = 0; k < plan.folds.size(); ++k) {
            const Fold& fold = plan.folds[k];
            std::vector<std::size_t> aux_rows;
            for (std::size_t t : aux_rows_per_fold[k])
                if (t < usable) aux_rows.push_back(t);
            std::vector<std::size_t> main_rows;
            for (std::size_t t = fold.main.begin; t < fold.main.end && t < usable; ++t)
                main_rows.push_back(t);
            if (aux_rows.empty() || main_rows.empty())
                throw NumericalError("estimate_lp: fold " + std::to_string(k + 1) +
                                     " has no usable rows at horizon " + std::to_string(h));

            const Matrix x_aux = gather_rows(controls, aux_rows);
            const Matrix x_main = gather_rows(controls, main_rows);
            // Outcome nuisance refit per horizon with the led outcome target.
            TunedNuisance g_hat = tune_nuisance(x_aux, gather(outcome, aux_rows, h), x_main,
                                                gather(outcome, main_rows, h), options.grid,
                                                options);
            if (!g_hat.diagnostics.converged) all_converged = false;

            std::vector<double> chi_block(main_rows.size());
            std::vector<double> xi_block(main_rows.size());
            for (std::size_t i = 0; i < main_rows.size(); ++i) {
                const std::size_t t = main_rows[i];
                chi_block[i] = outcome[t + h] - g_hat.main_predictions[i];
                xi_block[i] = xi[t];
                chi_h[t] = chi_block[i];
            }
            fold_thetas[k] = fold_theta(chi_block, xi_block);
        }

        const double theta_h = mean(fold_thetas);
        if (h == 0) report.per_fold_theta0 = fold_thetas;

        ScoreSeries horizon_scores;
        horizon_scores.chi = std::move(chi_h);
        horizon_scores.xi.assign(xi.begin(), xi.begin() + static_cast<std::ptrdiff_t>(usable));
        horizon_scores.fold_of_t.assign(fold_of_t.begin(),
                                        fold_of_t.begin() + static_cast<std::ptrdiff_t>(usable));
        horizon_scores.theta_hat = theta_h;
        const HacResult hac = hac_inference(horizon_scores, options.bandwidth);

        report.theta_h.push_back(theta_h);
        report.se_h.push_back(hac.se);
        report.bandwidth_h.push_back(hac.bandwidth);
        cumulative += theta_h;
        cumulative_var += hac.se * hac.se;
        report.cumulative_theta.push_back(cumulative);
        const double half = 1.96 * std::sqrt(cumulative_var);
        report.cumulative_ci.push_back({cumulative - half, cumulative + half});
    }
    report.all_converged = all_converged;
    return report;
}

nlohmann::json EstimateReport::to_json(bool include_traces) const {
    nlohmann::json j{{"theta_hat", theta_hat},
                     {"per_fold_thetas", per_fold_thetas},
                     {"se", se},
                     {"ci95", ci95},
                     {"a_hat", a_hat},
                     {"sigma_hat", sigma_hat},
                     {"bandwidth_used", bandwidth_used},
                     {"all_converged", all_converged},
                     {"T", T},
                     {"K", K},
                     {"scheme", to_string(scheme)},
                     {"criterion", to_string(criterion)}};
    if (include_traces) {
        nlohmann::json traces = nlohmann::json::array();
        for (const auto& fold : tuning_traces)
            traces.push_back({{"policy_nuisance", tsdml::to_json(fold[0].trace)},
                              {"outcome_nuisance", tsdml::to_json(fold[1].trace)},
                              {"converged", fold[0].converged && fold[1].converged}});
        j["tuning_traces"] = traces;
    }
    return j;
}

nlohmann::json LpReport::to_json() const {
    return {{"horizons", horizons},
            {"theta_h", theta_h},
            {"se_h", se_h},
            {"cumulative_theta", cumulative_theta},
            {"cumulative_ci", cumulative_ci},
            {"bandwidth_h", bandwidth_h},
            {"per_fold_theta0", per_fold_theta0},
            {"all_converged", all_converged},
            {"note", kCumulativeNote}};
}

std::string LpReport::irf_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "horizon,theta,se,cum_theta,cum_lo95,cum_hi95\n";
    for (std::size_t h = 0; h < theta_h.size(); ++h) {
        os << h << ',' << theta_h[h] << ',' << se_h[h] << ',' << cumulative_theta[h] << ','
           << cumulative_ci[h][0] << ',' << cumulative_ci[h][1] << '\n';
    }
    return os.str();
}

} // namespace tsdml
