#include "tsdml/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tsdml/errors.hpp"
#include "tsdml/linalg.hpp"

namespace tsdml {

void PenaltySpec::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("PenaltySpec: alpha must be >= 0");
    if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0))
        throw std::invalid_argument("PenaltySpec: l1_ratio must be in [0, 1]");
}

std::vector<double> LinearFit::predict(const Matrix& x) const {
    if (x.cols() != coefficients.size())
        throw std::invalid_argument("predict: column count does not match fit dimension");
    std::vector<double> out(x.rows(), intercept);
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] += dot(x.row(i), coefficients);
    return out;
}

namespace {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

struct StandardizedProblem {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<std::vector<double>> cols; // standardized columns
    std::vector<double> yc;                // centered y
    std::vector<double> col_means;
    std::vector<double> col_scales;
    double y_mean = 0.0;
    double y_scale = 1.0; // population sd of y; sets the sweep-tolerance scale
};

StandardizedProblem standardize(const Matrix& x, std::span<const double> y) {
    StandardizedProblem sp;
    sp.n = x.rows();
    sp.p = x.cols();
    const Standardizer st = Standardizer::fit(x);
    sp.col_means = st.means();
    sp.col_scales = st.scales();
    sp.cols.assign(sp.p, std::vector<double>(sp.n));
    for (std::size_t i = 0; i < sp.n; ++i) {
        const auto row = x.row(i);
        for (std::size_t j = 0; j < sp.p; ++j)
            sp.cols[j][i] = (row[j] - sp.col_means[j]) / sp.col_scales[j];
    }
    sp.y_mean = mean(y);
    sp.yc.resize(sp.n);
    for (std::size_t i = 0; i < sp.n; ++i) sp.yc[i] = y[i] - sp.y_mean;
    sp.y_scale = std::max(std::sqrt(population_variance(sp.yc)),
                          std::numeric_limits<double>::min());
    return sp;
}

double penalized_objective(const StandardizedProblem& sp, const std::vector<double>& residual,
                           const std::vector<double>& b, const PenaltySpec& pen) {
    double rss = 0.0;
    for (double r : residual) rss += r * r;
    double l1 = 0.0;
    double l2 = 0.0;
    for (double v : b) {
        l1 += std::abs(v);
        l2 += v * v;
    }
    return rss / (2.0 * static_cast<double>(sp.n)) +
           pen.alpha * (pen.l1_ratio * l1 + 0.5 * (1.0 - pen.l1_ratio) * l2);
}

} // namespace

LinearFit fit_elastic_net(const Matrix& x, std::span<const double> y, const PenaltySpec& penalty,
                          const FitOptions& options) {
    penalty.validate();
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (n < 2) throw std::invalid_argument("fit_elastic_net: need at least 2 rows");
    if (y.size() != n) throw std::invalid_argument("fit_elastic_net: y length mismatch");
    if (!x.all_finite()) throw NumericalError("fit_elastic_net: non-finite entries in X");
    for (double v : y)
        if (!std::isfinite(v)) throw NumericalError("fit_elastic_net: non-finite entries in y");
    if (options.warm_start && options.warm_start->size() != p)
        throw std::invalid_argument("fit_elastic_net: warm start dimension mismatch");

    StandardizedProblem sp = standardize(x, y);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double l1_pen = penalty.alpha * penalty.l1_ratio;
    const double l2_pen = penalty.alpha * (1.0 - penalty.l1_ratio);
    const double denom = 1.0 + l2_pen; // standardized columns have unit population variance
    // Sweep tolerance tracks the outcome's scale, keeping the stopping rule
    // invariant under rescaling of y.
    const double tol = options.tol * sp.y_scale;

    std::vector<double> b(p, 0.0);
    std::vector<double> residual = sp.yc;
    if (options.warm_start) {
        for (std::size_t j = 0; j < p; ++j) b[j] = (*options.warm_start)[j] * sp.col_scales[j];
        for (std::size_t j = 0; j < p; ++j) {
            const double bj = b[j];
            if (bj == 0.0) continue;
            const auto& col = sp.cols[j];
            for (std::size_t i = 0; i < n; ++i) residual[i] -= bj * col[i];
        }
    }

    std::vector<std::size_t> active;
    active.reserve(p);
    for (std::size_t j = 0; j < p; ++j)
        if (b[j] != 0.0) active.push_back(j);

    // One cyclic pass over the given coordinate set; returns the largest
    // coefficient change.
    auto sweep = [&](const std::vector<std::size_t>& coords) {
        double max_delta = 0.0;
        for (std::size_t j : coords) {
            const auto& col = sp.cols[j];
            double g = 0.0;
            const double* r = residual.data();
            const double* c = col.data();
            for (std::size_t i = 0; i < n; ++i) g += c[i] * r[i];
            const double z = b[j] + g * inv_n;
            const double bj_new = soft_threshold(z, l1_pen) / denom;
            const double delta = bj_new - b[j];
            if (delta != 0.0) {
                double* rm = residual.data();
                for (std::size_t i = 0; i < n; ++i) rm[i] -= delta * c[i];
                b[j] = bj_new;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        return max_delta;
    };

    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;

    std::size_t iterations = 0;
    bool converged = false;
    while (iterations < options.max_iter) {
        const double full_delta = sweep(all);
        ++iterations;
        if (options.objective_trace)
            options.objective_trace->push_back(penalized_objective(sp, residual, b, penalty));
        if (full_delta < tol) {
            converged = true;
            break;
        }
        // Iterate on the current active set until stable, then re-check all
        // coordinates with the next full sweep.
        active.clear();
        for (std::size_t j = 0; j < p; ++j)
            if (b[j] != 0.0) active.push_back(j);
        while (iterations < options.max_iter) {
            const double delta = sweep(active);
            ++iterations;
            if (options.objective_trace)
                options.objective_trace->push_back(penalized_objective(sp, residual, b, penalty));
            if (delta < tol) break;
        }
    }

    LinearFit fit;
    fit.penalty = penalty;
    fit.n_iterations = iterations;
    fit.converged = converged;
    fit.coefficients.resize(p);
    double mean_shift = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        fit.coefficients[j] = b[j] / sp.col_scales[j];
        mean_shift += fit.coefficients[j] * sp.col_means[j];
    }
    fit.intercept = sp.y_mean - mean_shift;
    fit.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.fitted[i] = y[i] - residual[i];
    return fit;
}

std::vector<LinearFit> fit_elastic_net_path(const Matrix& x, std::span<const double> y,
                                            std::span<const double> alphas, double l1_ratio,
                                            const FitOptions& options) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (n < 2) throw std::invalid_argument("fit_elastic_net_path: need at least 2 rows");
    if (y.size() != n) throw std::invalid_argument("fit_elastic_net_path: y length mismatch");
    if (!x.all_finite()) throw NumericalError("fit_elastic_net_path: non-finite entries in X");
    for (double v : y)
        if (!std::isfinite(v)) throw NumericalError("fit_elastic_net_path: non-finite y");

    StandardizedProblem sp = standardize(x, y);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double tol = options.tol * sp.y_scale;

    // Descending-penalty visit order; outputs keep the caller's order.
    std::vector<std::size_t> order(alphas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return alphas[a] > alphas[b]; });

    std::vector<double> b(p, 0.0);
    std::vector<double> residual = sp.yc;
    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;
    std::vector<std::size_t> active;
    active.reserve(p);

    std::vector<LinearFit> fits(alphas.size());
    for (std::size_t idx : order) {
        PenaltySpec pen{alphas[idx], l1_ratio};
        pen.validate();
        const double l1_pen = pen.alpha * pen.l1_ratio;
        const double denom = 1.0 + pen.alpha * (1.0 - pen.l1_ratio);

        auto sweep = [&](const std::vector<std::size_t>& coords) {
            double max_delta = 0.0;
            for (std::size_t j : coords) {
                const auto& col = sp.cols[j];
                double g = 0.0;
                const double* r = residual.data();
                const double* c = col.data();
                for (std::size_t i = 0; i < n; ++i) g += c[i] * r[i];
                const double z = b[j] + g * inv_n;
                const double bj_new = soft_threshold(z, l1_pen) / denom;
                const double delta = bj_new - b[j];
                if (delta != 0.0) {
                    double* rm = residual.data();
                    for (std::size_t i = 0; i < n; ++i) rm[i] -= delta * c[i];
                    b[j] = bj_new;
                }
                max_delta = std::max(max_delta, std::abs(delta));
            }
            return max_delta;
        };

        std::size_t iterations = 0;
        bool converged = false;
        while (iterations < options.max_iter) {
            const double full_delta = sweep(all);
            ++iterations;
            if (full_delta < tol) {
                converged = true;
                break;
            }
            active.clear();
            for (std::size_t j = 0; j < p; ++j)
                if (b[j] != 0.0) active.push_back(j);
            while (iterations < options.max_iter) {
                const double delta = sweep(active);
                ++iterations;
                if (delta < tol) break;
            }
        }

        LinearFit& fit = fits[idx];
        fit.penalty = pen;
        fit.n_iterations = iterations;
        fit.converged = converged;
        fit.coefficients.resize(p);
        double mean_shift = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            fit.coefficients[j] = b[j] / sp.col_scales[j];
            mean_shift += fit.coefficients[j] * sp.col_means[j];
        }
        fit.intercept = sp.y_mean - mean_shift;
    }
    return fits;
}

double rmse(std::span<const double> predictions, std::span<const double> truth) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("rmse: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("rmse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predictions.size()));
}

double kkt_violation(const LinearFit& fit, const Matrix& x, std::span<const double> y) {
    const StandardizedProblem sp = standardize(x, y);
    const std::size_t n = sp.n;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double l1_pen = fit.penalty.alpha * fit.penalty.l1_ratio;
    const double l2_pen = fit.penalty.alpha * (1.0 - fit.penalty.l1_ratio);

    std::vector<double> b(sp.p);
    for (std::size_t j = 0; j < sp.p; ++j) b[j] = fit.coefficients[j] * sp.col_scales[j];
    std::vector<double> residual = sp.yc;
    for (std::size_t j = 0; j < sp.p; ++j) {
        if (b[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) residual[i] -= b[j] * sp.cols[j][i];
    }

    double worst = 0.0;
    for (std::size_t j = 0; j < sp.p; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += sp.cols[j][i] * residual[i];
        g *= inv_n;
        if (b[j] != 0.0) {
            const double target = l1_pen * (b[j] > 0.0 ? 1.0 : -1.0);
            worst = std::max(worst, std::abs(g - l2_pen * b[j] - target));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(g) - l1_pen));
        }
    }
    return worst;
}

} // namespace tsdml
