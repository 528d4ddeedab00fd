#include "tsdml/dgp.hpp"

#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tsdml/errors.hpp"
#include "tsdml/linalg.hpp"

namespace tsdml {

void GarchSpec::validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("GarchSpec: omega must be positive");
    if (!(alpha >= 0.0 && beta >= 0.0))
        throw std::invalid_argument("GarchSpec: alpha and beta must be non-negative");
    if (!(alpha + beta < 1.0))
        throw std::invalid_argument("GarchSpec: need alpha + beta < 1 for stationarity");
}

std::string to_string(Ordering o) { return o == Ordering::correct ? "correct" : "misspecified"; }

Ordering ordering_from_string(const std::string& s) {
    if (s == "correct") return Ordering::correct;
    if (s == "misspecified") return Ordering::misspecified;
    throw std::invalid_argument("unknown ordering: " + s);
}

void SvarSpec::validate() const {
    if (n < 4) throw std::invalid_argument("SvarSpec: need n >= 4");
    if (!(d_min > 0.0)) throw std::invalid_argument("SvarSpec: d_min must be positive");
    if (!(d_max >= d_min)) throw std::invalid_argument("SvarSpec: need d_max >= d_min");
    if (!(rho_star > 0.0 && rho_star < 1.0))
        throw std::invalid_argument("SvarSpec: rho_star must lie in (0, 1)");
    if (burn_in < 1) throw std::invalid_argument("SvarSpec: need burn_in >= 1");
    if (garch) garch->validate();
}

std::string SvarSpec::fingerprint() const {
    std::ostringstream os;
    os << "svar;n=" << n << ";b=" << band << ";kappa=" << kappa << ";alpha=" << alpha_decay
       << ";beta=" << beta_decay << ";delta=" << delta << ";omega=" << omega
       << ";gamma=" << gamma << ";rho_star=" << rho_star << ";d=[" << d_min << "," << d_max
       << "];mu=" << mu << ";burn=" << burn_in << ";ordering=" << to_string(ordering);
    if (garch)
        os << ";garch=(" << garch->omega << "," << garch->alpha << "," << garch->beta << ")";
    return os.str();
}

void PlrSpec::validate() const {
    if (p < 1) throw std::invalid_argument("PlrSpec: need p >= 1");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("PlrSpec: need |rho| < 1");
    if (!(std::abs(cor) < 1.0)) throw std::invalid_argument("PlrSpec: need |cor| < 1");
    if (!(sigma_xi >= 0.0 && sigma_eps >= 0.0))
        throw std::invalid_argument("PlrSpec: noise scales must be non-negative");
}

std::string PlrSpec::fingerprint() const {
    std::ostringstream os;
    os << "plr;p=" << p << ";rho=" << rho << ";cor=" << cor << ";theta0=" << theta0
       << ";burn=" << burn_in << ";coef_scale=" << coef_scale << ";sigma_xi=" << sigma_xi
       << ";sigma_eps=" << sigma_eps;
    return os.str();
}

SvarMatrices build_svar_matrices(const SvarSpec& spec, RngStream& rng) {
    spec.validate();
    const std::size_t n = spec.n;
    const auto b = static_cast<std::ptrdiff_t>(spec.band);

    Matrix phi(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto gap = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j);
            if (gap > b || gap < -b) continue;
            const double eta = rng.uniform(0.8, 1.2);
            const double dist = std::abs(static_cast<double>(gap));
            if (gap > 0) {
                phi(i, j) = spec.kappa / (1.0 + std::pow(dist, spec.alpha_decay)) * eta;
            } else if (gap < 0) {
                phi(i, j) = 0.6 * spec.kappa / (1.0 + std::pow(dist, spec.beta_decay)) * eta;
            } else {
                phi(i, j) = spec.kappa * eta;
            }
        }
    }
    const double radius = spectral_radius(phi);
    if (radius > spec.rho_star) phi *= spec.rho_star / radius;

    Matrix impact(n, n);
    for (std::size_t i = 0; i < n; ++i) impact(i, i) = rng.uniform(spec.d_min, spec.d_max);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double xi = rng.uniform(0.4, 1.6);
            impact(i, j) =
                spec.omega * xi / (1.0 + std::pow(static_cast<double>(i - j), spec.delta));
        }
    }
    // The designated contemporaneous policy impact is pinned for both
    // candidate policy positions, so the generated path does not depend on
    // which ordering scenario is being estimated.
    const std::size_t out = spec.outcome_variable();
    impact(out, n - 2) = spec.gamma;
    impact(out, (n - 1) / 2) = spec.gamma;
    return {std::move(phi), std::move(impact)};
}

namespace {

// y <- mu + Phi y_prev + eps, exploiting the band structure of Phi.
void banded_step(const Matrix& phi, std::size_t band, double mu,
                 const std::vector<double>& y_prev, const std::vector<double>& eps,
                 std::vector<double>& y_out) {
    const std::size_t n = y_prev.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > band ? i - band : 0;
        const std::size_t hi = std::min(n - 1, i + band);
        double s = mu + eps[i];
        for (std::size_t j = lo; j <= hi; ++j) s += phi(i, j) * y_prev[j];
        y_out[i] = s;
    }
}

void lower_tri_apply(const Matrix& l, const std::vector<double>& x, std::vector<double>& out) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * x[j];
        out[i] = s;
    }
}

} // namespace

SimulatedSample simulate_svar(const SvarSpec& spec, std::size_t T, RngStream& rng,
                              std::optional<std::size_t> irf_horizons) {
    spec.validate();
    if (T < 10) throw std::invalid_argument("simulate_svar: need T >= 10");
    const std::size_t n = spec.n;
    const auto [phi, impact] = build_svar_matrices(spec, rng);

    const std::size_t steps = spec.burn_in + T;
    const std::size_t keep_from = spec.burn_in;
    Matrix path(T, n);

    std::vector<double> y(n, 0.0);
    std::vector<double> y_next(n, 0.0);
    std::vector<double> shocks(n, 0.0);
    std::vector<double> eps(n, 0.0);
    std::vector<double> h;
    std::vector<double> u_prev;
    if (spec.garch) {
        h.assign(n, spec.garch->unconditional_variance());
        u_prev.assign(n, 0.0);
    }

    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) shocks[i] = rng.normal();
        if (spec.garch) {
            const GarchSpec& g = *spec.garch;
            for (std::size_t i = 0; i < n; ++i) {
                if (step > 0) h[i] = g.omega + g.alpha * u_prev[i] * u_prev[i] + g.beta * h[i];
                assert(h[i] > 0.0);
                shocks[i] *= std::sqrt(h[i]);
                u_prev[i] = shocks[i];
            }
        }
        lower_tri_apply(impact, shocks, eps);
        banded_step(phi, spec.band, spec.mu, y, eps, y_next);
        std::swap(y, y_next);
        if (step >= keep_from) {
            auto row = path.row(step - keep_from);
            for (std::size_t i = 0; i < n; ++i) row[i] = y[i];
        }
    }

    const std::size_t out = spec.outcome_variable();
    const std::size_t pol = spec.policy_variable();

    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<Role> roles;
    auto add_column = [&](std::string name, Role role, std::size_t var) {
        names.push_back(std::move(name));
        roles.push_back(role);
        std::vector<double> col(T);
        for (std::size_t t = 0; t < T; ++t) col[t] = path(t, var);
        columns.push_back(std::move(col));
    };

    add_column("y", Role::outcome, out);
    add_column("d", Role::policy, pol);
    for (std::size_t v = 0; v < n; ++v) {
        if (v == out || v == pol) continue;
        add_column("x" + std::to_string(v + 1), Role::control, v);
    }

    std::vector<std::string> labels(T);
    for (std::size_t t = 0; t < T; ++t) labels[t] = std::to_string(t + 1);

    SimulatedSample sample;
    sample.dataset =
        TimeSeriesDataset(std::move(names), std::move(columns), std::move(roles), std::move(labels));
    sample.theta_true = impact(out, pol) / impact(pol, pol);
    if (irf_horizons)
        sample.irf_true = true_irf_svar(phi, impact, *irf_horizons, spec.ordering);
    sample.fingerprint = spec.fingerprint() + ";T=" + std::to_string(T);
    return sample;
}

PlrCoefficients draw_plr_coefficients(const PlrSpec& spec, RngStream& rng) {
    PlrCoefficients coef;
    coef.beta.resize(spec.p);
    coef.gamma.resize(spec.p);
    for (std::size_t i = 0; i < spec.p; ++i) {
        const double iota = rng.beta(1.0, 0.7);
        const double inv = 1.0 / static_cast<double>(i + 1);
        coef.beta[i] = spec.coef_scale * iota * inv * inv;
    }
    for (std::size_t i = 0; i < spec.p; ++i) {
        const double zeta = rng.beta(0.25, 0.8);
        const double inv = 2.0 / static_cast<double>(i + 1);
        coef.gamma[i] = spec.coef_scale * zeta * inv * inv;
    }
    return coef;
}

SimulatedSample simulate_plr(const PlrSpec& spec, std::size_t T, RngStream& rng) {
    const PlrCoefficients coef = draw_plr_coefficients(spec, rng);
    return simulate_plr_with(spec, coef, T, rng);
}

SimulatedSample simulate_plr_with(const PlrSpec& spec, const PlrCoefficients& coef, std::size_t T,
                                  RngStream& rng) {
    spec.validate();
    if (T < 10) throw std::invalid_argument("simulate_plr: need T >= 10");
    if (coef.beta.size() != spec.p || coef.gamma.size() != spec.p)
        throw std::invalid_argument("simulate_plr: coefficient length mismatch");
    const std::size_t p = spec.p;

    Matrix chol_omega;
    const bool correlated = spec.cor != 0.0;
    if (correlated) {
        Matrix omega(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                omega(i, j) = std::pow(spec.cor, std::abs(static_cast<double>(i) -
                                                          static_cast<double>(j)));
        chol_omega = cholesky(omega);
    }

    std::vector<double> x(p, 0.0);
    std::vector<double> z(p, 0.0);
    std::vector<double> e(p, 0.0);

    std::vector<std::vector<double>> xcols(p, std::vector<double>(T));
    std::vector<double> d(T);
    std::vector<double> yv(T);

    const std::size_t steps = spec.burn_in + T;
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < p; ++i) z[i] = rng.normal();
        if (correlated) {
            lower_tri_apply(chol_omega, z, e);
        } else {
            e = z;
        }
        for (std::size_t i = 0; i < p; ++i) x[i] = spec.rho * x[i] + e[i];
        if (step < spec.burn_in) continue;
        const std::size_t t = step - spec.burn_in;
        double db = 0.0;
        double gb = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            xcols[i][t] = x[i];
            db += x[i] * coef.beta[i];
            gb += x[i] * coef.gamma[i];
        }
        const double xi = spec.sigma_xi * rng.normal();
        const double epsilon = spec.sigma_eps * rng.normal();
        d[t] = db + xi;
        yv[t] = spec.theta0 * d[t] + gb + epsilon;
    }

    std::vector<std::string> names{"y", "d"};
    std::vector<std::vector<double>> columns{std::move(yv), std::move(d)};
    std::vector<Role> roles{Role::outcome, Role::policy};
    for (std::size_t i = 0; i < p; ++i) {
        names.push_back("x" + std::to_string(i + 1));
        columns.push_back(std::move(xcols[i]));
        roles.push_back(Role::control);
    }
    std::vector<std::string> labels(T);
    for (std::size_t t = 0; t < T; ++t) labels[t] = std::to_string(t + 1);

    SimulatedSample sample;
    sample.dataset =
        TimeSeriesDataset(std::move(names), std::move(columns), std::move(roles), std::move(labels));
    sample.theta_true = spec.theta0;
    sample.fingerprint = spec.fingerprint() + ";T=" + std::to_string(T);
    return sample;
}

namespace {

std::size_t policy_position(const Matrix& phi1, Ordering ordering) {
    const std::size_t n = phi1.rows();
    return ordering == Ordering::correct ? n - 2 : (n - 1) / 2;
}

} // namespace

double true_theta_svar(const Matrix& phi1, const Matrix& impact, Ordering ordering) {
    if (phi1.rows() != phi1.cols() || impact.rows() != impact.cols() ||
        phi1.rows() != impact.rows())
        throw std::invalid_argument("true_theta_svar: shape mismatch");
    const std::size_t n = phi1.rows();
    if (n < 2) throw std::invalid_argument("true_theta_svar: need n >= 2");
    const std::size_t out = n - 1;
    const std::size_t pol = policy_position(phi1, ordering);

    const Matrix sigma_eps = multiply_transposed(impact, impact);
    const Matrix sigma_y = lyapunov_solve(phi1, sigma_eps);
    const Matrix cross = phi1 * sigma_y; // Cov(Y_t, Y_{t-1})

    // Regressors: policy first, then contemporaneous variables ordered before
    // it, then one lag of every variable.
    std::vector<std::size_t> contemp{pol};
    for (std::size_t v = 0; v < pol; ++v) contemp.push_back(v);
    const std::size_t q = contemp.size() + n;

    Matrix gram(q, q);
    std::vector<double> rhs(q, 0.0);
    for (std::size_t a = 0; a < contemp.size(); ++a) {
        for (std::size_t b = 0; b < contemp.size(); ++b)
            gram(a, b) = sigma_y(contemp[a], contemp[b]);
        for (std::size_t m = 0; m < n; ++m) {
            gram(a, contemp.size() + m) = cross(contemp[a], m);
            gram(contemp.size() + m, a) = cross(contemp[a], m);
        }
        rhs[a] = sigma_y(contemp[a], out);
    }
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t m2 = 0; m2 < n; ++m2)
            gram(contemp.size() + m, contemp.size() + m2) = sigma_y(m, m2);
        rhs[contemp.size() + m] = cross(out, m);
    }

    std::vector<double> beta;
    try {
        beta = solve_spd(gram, rhs);
    } catch (const NumericalError&) {
        throw NumericalError("true_theta_svar: singular projection (collinear covariance)");
    }
    return beta[0];
}

std::vector<double> true_irf_svar(const Matrix& phi1, const Matrix& impact, std::size_t H,
                                  Ordering ordering) {
    if (phi1.rows() != phi1.cols() || impact.rows() != impact.cols() ||
        phi1.rows() != impact.rows())
        throw std::invalid_argument("true_irf_svar: shape mismatch");
    const std::size_t n = phi1.rows();
    const std::size_t out = n - 1;
    const std::size_t pol = policy_position(phi1, ordering);

    std::vector<double> v = impact.col(pol);
    const double scale = impact(pol, pol);
    for (double& x : v) x /= scale;

    std::vector<double> irf(H + 1);
    for (std::size_t h = 0; h <= H; ++h) {
        irf[h] = v[out];
        if (h < H) v = phi1.apply(v);
    }
    return irf;
}

} // namespace tsdml
