#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsdml/dgp.hpp"
#include "tsdml/linalg.hpp"
#include "tsdml/rng.hpp"

using namespace tsdml;

namespace {

SvarSpec small_svar(std::size_t n = 6, Ordering ordering = Ordering::correct) {
    SvarSpec spec;
    spec.n = n;
    spec.band = 2;
    spec.ordering = ordering;
    return spec;
}

// Reassemble the underlying variable paths (contemporaneous part) from the
// role-labelled dataset columns.
Matrix variables_from_dataset(const TimeSeriesDataset& data, const SvarSpec& spec) {
    const std::size_t n = spec.n;
    Matrix y(data.T(), n);
    auto fill = [&](const std::string& name, std::size_t var) {
        std::size_t j = 0;
        while (data.names()[j] != name) ++j;
        for (std::size_t t = 0; t < data.T(); ++t) y(t, var) = data.column(j)[t];
    };
    fill("y", spec.outcome_variable());
    fill("d", spec.policy_variable());
    for (std::size_t v = 0; v < n; ++v) {
        if (v == spec.outcome_variable() || v == spec.policy_variable()) continue;
        fill("x" + std::to_string(v + 1), v);
    }
    return y;
}

} // namespace

TEST_CASE("svar matrices respect band, triangularity and the spectral cap") {
    SvarSpec spec = small_svar(12);
    spec.band = 3;
    RngStream rng(100, 0);
    const auto [phi, impact] = build_svar_matrices(spec, rng);

    CHECK(spectral_radius(phi) <= spec.rho_star + 1e-10);
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = 0; j < spec.n; ++j) {
            const auto gap = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j);
            if (gap > 3 || gap < -3) CHECK(phi(i, j) == 0.0);
            if (j > i) CHECK(impact(i, j) == 0.0);
        }
        CHECK(impact(i, i) >= spec.d_min);
        CHECK(impact(i, i) <= spec.d_max);
    }
    // Designated policy impact rows.
    CHECK(impact(spec.n - 1, spec.n - 2) == spec.gamma);
    CHECK(impact(spec.n - 1, (spec.n - 1) / 2) == spec.gamma);
}

TEST_CASE("svar spec validation") {
    SvarSpec bad = small_svar();
    bad.d_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    SvarSpec tiny = small_svar(3);
    CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
    GarchSpec g;
    g.alpha = 0.2;
    g.beta = 0.85;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("simulated svar autocovariance matches the Lyapunov fixed point") {
    SvarSpec spec = small_svar(6);
    const std::size_t T = 200000;
    RngStream rng(7, 0);
    const SimulatedSample sample = simulate_svar(spec, T, rng);

    RngStream rng2(7, 0);
    const auto [phi, impact] = build_svar_matrices(spec, rng2);
    const Matrix sigma = oracles::lyapunov_recursion(phi, multiply_transposed(impact, impact));

    const Matrix y = variables_from_dataset(sample.dataset, spec);
    const std::size_t n = spec.n;
    std::vector<double> means(n, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t v = 0; v < n; ++v) means[v] += y(t, v);
    for (auto& m : means) m /= static_cast<double>(T);
    Matrix sigma_hat(n, n);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                sigma_hat(a, b) += (y(t, a) - means[a]) * (y(t, b) - means[b]);
    sigma_hat *= 1.0 / static_cast<double>(T);

    const double scale = sigma.max_abs();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            CHECK(std::abs(sigma_hat(a, b) - sigma(a, b)) <=
                  0.05 * std::max(std::abs(sigma(a, b)), 0.1 * scale));
}

TEST_CASE("garch shocks have unit unconditional variance") {
    SvarSpec spec = small_svar(4);
    spec.kappa = 0.0; // Y_t = P u_t, so shocks can be recovered exactly
    spec.garch = GarchSpec{};
    const std::size_t T = 100000;
    RngStream rng(13, 0);
    const SimulatedSample sample = simulate_svar(spec, T, rng);

    RngStream rng2(13, 0);
    const auto [phi, impact] = build_svar_matrices(spec, rng2);
    CHECK(phi.max_abs() == 0.0);

    const Matrix y = variables_from_dataset(sample.dataset, spec);
    // Forward-solve P u = y row by row.
    std::vector<std::vector<double>> shocks(spec.n, std::vector<double>(T));
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < spec.n; ++i) {
            double s = y(t, i);
            for (std::size_t j = 0; j < i; ++j) s -= impact(i, j) * shocks[j][t];
            shocks[i][t] = s / impact(i, i);
        }
    }
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double var = oracles::sample_variance(shocks[i]);
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
        CHECK(std::abs(oracles::sample_mean(shocks[i])) < 0.02);
    }
}

TEST_CASE("simulation is deterministic in (seed, spec, T)") {
    SvarSpec spec = small_svar(5);
    RngStream a(3, 9);
    RngStream b(3, 9);
    const SimulatedSample s1 = simulate_svar(spec, 50, a);
    const SimulatedSample s2 = simulate_svar(spec, 50, b);
    REQUIRE(s1.dataset.n_columns() == s2.dataset.n_columns());
    for (std::size_t j = 0; j < s1.dataset.n_columns(); ++j)
        CHECK(s1.dataset.column(j) == s2.dataset.column(j));
    CHECK(s1.theta_true == s2.theta_true);
}

TEST_CASE("orderings share the generated path and matrices") {
    const SvarSpec correct = small_svar(8, Ordering::correct);
    const SvarSpec missp = small_svar(8, Ordering::misspecified);
    RngStream a(21, 4);
    RngStream b(21, 4);
    const SimulatedSample s1 = simulate_svar(correct, 60, a);
    const SimulatedSample s2 = simulate_svar(missp, 60, b);

    const Matrix y1 = variables_from_dataset(s1.dataset, correct);
    const Matrix y2 = variables_from_dataset(s2.dataset, missp);
    CHECK(y1 == y2);

    RngStream c(21, 4);
    RngStream d(21, 4);
    const auto m1 = build_svar_matrices(correct, c);
    const auto m2 = build_svar_matrices(missp, d);
    CHECK(m1.phi1 == m2.phi1);
    CHECK(m1.impact == m2.impact);
}

TEST_CASE("theta_true equals the structural impact ratio") {
    for (Ordering ordering : {Ordering::correct, Ordering::misspecified}) {
        const SvarSpec spec = small_svar(9, ordering);
        RngStream rng(33, 1);
        const SimulatedSample sample = simulate_svar(spec, 40, rng);
        RngStream rng2(33, 1);
        const auto [phi, impact] = build_svar_matrices(spec, rng2);
        const std::size_t out = spec.outcome_variable();
        const std::size_t pol = spec.policy_variable();
        CHECK(sample.theta_true == impact(out, pol) / impact(pol, pol));
    }
}

TEST_CASE("population projection equals the structural ratio") {
    for (Ordering ordering : {Ordering::correct, Ordering::misspecified}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const SvarSpec spec = small_svar(8, ordering);
            RngStream rng(seed, 0);
            const auto [phi, impact] = build_svar_matrices(spec, rng);
            const std::size_t out = spec.outcome_variable();
            const std::size_t pol = spec.policy_variable();
            const double structural = impact(out, pol) / impact(pol, pol);
            const double projection = true_theta_svar(phi, impact, ordering);
            CHECK(projection == doctest::Approx(structural).epsilon(1e-8));
        }
    }
}

TEST_CASE("two-variable static system has the hand-computed projection") {
    const Matrix phi(2, 2); // no dynamics
    Matrix impact = Matrix::from_rows({{2.0, 0.0}, {0.8, 1.0}});
    // Cov(d, y)/Var(d) = P10 P00 / P00^2 = 0.4
    CHECK(true_theta_svar(phi, impact, Ordering::correct) ==
          doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("moderate-sample least squares agrees with the population projection") {
    const SvarSpec spec = small_svar(6);
    const std::size_t T = 30000;
    RngStream rng(55, 0);
    const SimulatedSample sample = simulate_svar(spec, T, rng);
    RngStream rng2(55, 0);
    const auto [phi, impact] = build_svar_matrices(spec, rng2);
    const double truth = true_theta_svar(phi, impact, Ordering::correct);

    // Outcome on intercept + policy + contemporaneous controls + lags.
    const TimeSeriesDataset& data = sample.dataset;
    const Matrix controls = data.controls();
    Matrix design(T, controls.cols() + 2);
    for (std::size_t t = 0; t < T; ++t) {
        design(t, 0) = 1.0;
        design(t, 1) = data.policy()[t];
        for (std::size_t j = 0; j < controls.cols(); ++j) design(t, j + 2) = controls(t, j);
    }
    const auto beta = ols_solve(design, data.outcome());

    // Classical standard error; the projection residual is an independent shock.
    std::vector<double> resid = data.outcome();
    for (std::size_t t = 0; t < T; ++t) resid[t] -= dot(design.row(t), beta);
    const double s2 = dot(resid, resid) / static_cast<double>(T - design.cols());
    const auto xtx_inv_11 = [&]() {
        Matrix xtx(design.cols(), design.cols());
        for (std::size_t t = 0; t < T; ++t) {
            const auto row = design.row(t);
            for (std::size_t a = 0; a < design.cols(); ++a)
                for (std::size_t b = 0; b < design.cols(); ++b) xtx(a, b) += row[a] * row[b];
        }
        std::vector<double> e(design.cols(), 0.0);
        e[1] = 1.0;
        return solve_spd(xtx, e)[1];
    }();
    const double se = std::sqrt(s2 * xtx_inv_11);
    CHECK(std::abs(beta[1] - truth) < 3.0 * se);
}

TEST_CASE("true irf starts at the contemporaneous effect and decays geometrically") {
    const SvarSpec spec = small_svar(7);
    RngStream rng(77, 0);
    const auto [phi, impact] = build_svar_matrices(spec, rng);

    const auto irf = true_irf_svar(phi, impact, 60, Ordering::correct);
    REQUIRE(irf.size() == 61);
    CHECK(irf[0] == doctest::Approx(true_theta_svar(phi, impact, Ordering::correct))
                        .epsilon(1e-8));

    double c = 0.0;
    for (std::size_t h = 0; h <= 30; ++h)
        c = std::max(c, std::abs(irf[h]) / std::pow(0.95, static_cast<double>(h)));
    CHECK(std::abs(irf[60]) <= c * std::pow(0.95, 60.0) * (1.0 + 1e-9));

    Matrix zero(7, 7);
    const auto flat = true_irf_svar(zero, impact, 5, Ordering::correct);
    for (std::size_t h = 1; h <= 5; ++h) CHECK(flat[h] == 0.0);
    CHECK(flat[0] != 0.0);
}

TEST_CASE("plr coefficient envelopes") {
    PlrSpec spec;
    spec.p = 8;
    RngStream rng(5, 0);
    const PlrCoefficients coef = draw_plr_coefficients(spec, rng);
    CHECK(coef.beta[0] <= 1.0);
    CHECK(coef.beta[3] <= 1.0 / 16.0);
    for (std::size_t i = 0; i < spec.p; ++i) {
        CHECK(coef.beta[i] >= 0.0);
        CHECK(coef.gamma[i] >= 0.0);
        const double inv = 1.0 / static_cast<double>(i + 1);
        CHECK(coef.beta[i] <= inv * inv);
        CHECK(coef.gamma[i] <= 4.0 * inv * inv);
    }
}

TEST_CASE("plr without confounding is an unconfounded regression") {
    PlrSpec spec;
    spec.p = 5;
    spec.rho = 0.0;
    spec.cor = 0.0;
    spec.coef_scale = 0.0;
    const std::size_t T = 10000;
    RngStream rng(2, 0);
    const SimulatedSample sample = simulate_plr(spec, T, rng);
    CHECK(sample.theta_true == 0.5);

    const auto& d = sample.dataset.policy();
    const auto& y = sample.dataset.outcome();
    double sdd = 0.0;
    double sdy = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        sdd += d[t] * d[t];
        sdy += d[t] * y[t];
    }
    const double slope = sdy / sdd;
    const double se = 1.0 / std::sqrt(sdd); // unit outcome noise
    CHECK(std::abs(slope - 0.5) < 3.0 * se);
}

TEST_CASE("plr confounders are stationary after burn-in at rho = 0.9") {
    PlrSpec spec;
    spec.p = 2;
    spec.rho = 0.9;
    spec.cor = 0.7;
    const std::size_t T = 200000;
    RngStream rng(31, 0);
    const SimulatedSample sample = simulate_plr(spec, T, rng);
    for (std::size_t j = 0; j < spec.p; ++j) {
        const auto& col = sample.dataset.column(2 + j); // after y, d
        const std::span<const double> first(col.data(), T / 2);
        const std::span<const double> second(col.data() + T / 2, T / 2);
        const double v1 = oracles::sample_variance(first);
        const double v2 = oracles::sample_variance(second);
        CHECK(std::abs(v1 - v2) / v1 < 0.10);
    }
}

TEST_CASE("plr datasets are deterministic and carry the true effect") {
    PlrSpec spec;
    spec.p = 4;
    RngStream a(2, 2);
    RngStream b(2, 2);
    const SimulatedSample s1 = simulate_plr(spec, 30, a);
    const SimulatedSample s2 = simulate_plr(spec, 30, b);
    for (std::size_t j = 0; j < s1.dataset.n_columns(); ++j)
        CHECK(s1.dataset.column(j) == s2.dataset.column(j));
    CHECK(s1.theta_true == 0.5);
    CHECK(s1.dataset.T() == 30);
}
