#ifndef TSDML_DGP_HPP
#define TSDML_DGP_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsdml/dataset.hpp"
#include "tsdml/matrix.hpp"
#include "tsdml/rng.hpp"

namespace tsdml {

struct GarchSpec {
    double omega = 0.05;
    double alpha = 0.10;
    double beta = 0.85;

    void validate() const;
    double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

enum class Ordering { correct, misspecified };

std::string to_string(Ordering o);
Ordering ordering_from_string(const std::string& s);

/// Recursive SVAR design: banded autoregressive matrix with asymmetric decay,
/// lower-triangular impact matrix, optional GARCH(1,1) shock variances.
struct SvarSpec {
    std::size_t n = 100;  // system dimension
    std::size_t band = 5; // autoregressive band width
    double kappa = 0.3;
    double alpha_decay = 1.5; // below-diagonal decay exponent
    double beta_decay = 2.0;  // above-diagonal decay exponent
    double delta = 1.5;       // impact-matrix decay exponent
    double omega = 0.7;       // impact-matrix off-diagonal scale
    double gamma = 0.5;       // contemporaneous policy-to-outcome impact
    double rho_star = 0.95;   // spectral radius cap
    double d_min = 0.8;
    double d_max = 1.2;
    double mu = 0.0; // constant term
    std::size_t burn_in = 300;
    Ordering ordering = Ordering::correct;
    std::optional<GarchSpec> garch;

    void validate() const;
    std::size_t outcome_variable() const { return n - 1; }
    std::size_t policy_variable() const {
        return ordering == Ordering::correct ? n - 2 : (n - 1) / 2;
    }
    std::string fingerprint() const;
};

struct SvarMatrices {
    Matrix phi1;
    Matrix impact; // lower-triangular P with P P' the reduced-form covariance
};

SvarMatrices build_svar_matrices(const SvarSpec& spec, RngStream& rng);

/// Diagonal-VAR(1) confounders with approximately sparse policy/outcome
/// loadings drawn once per replication.
struct PlrSpec {
    std::size_t p = 100; // confounder count
    double rho = 0.9;    // diagonal AR coefficient
    double cor = 0.7;    // innovation correlation decay
    double theta0 = 0.5;
    std::size_t burn_in = 300;
    double coef_scale = 1.0; // scales beta and gamma; 0 removes confounding
    double sigma_xi = 1.0;   // policy noise sd
    double sigma_eps = 1.0;  // outcome noise sd

    void validate() const;
    std::string fingerprint() const;
};

struct PlrCoefficients {
    std::vector<double> beta;
    std::vector<double> gamma;
};

PlrCoefficients draw_plr_coefficients(const PlrSpec& spec, RngStream& rng);

struct SimulatedSample {
    TimeSeriesDataset dataset;
    double theta_true = 0.0;
    std::optional<std::vector<double>> irf_true;
    std::string fingerprint;
};

SimulatedSample simulate_svar(const SvarSpec& spec, std::size_t T, RngStream& rng,
                              std::optional<std::size_t> irf_horizons = std::nullopt);

SimulatedSample simulate_plr(const PlrSpec& spec, std::size_t T, RngStream& rng);
SimulatedSample simulate_plr_with(const PlrSpec& spec, const PlrCoefficients& coef, std::size_t T,
                                  RngStream& rng);

/// Population coefficient on the policy variable when the outcome is
/// projected on the policy, the contemporaneous variables ordered before it,
/// and one lag of every variable; computed from the stationary covariance.
/// Equals the recursive contemporaneous effect of the policy shock.
double true_theta_svar(const Matrix& phi1, const Matrix& impact, Ordering ordering);

/// Horizon 0..H responses of the outcome variable to the identified policy
/// impulse, normalized to a unit horizon-0 move of the policy variable.
std::vector<double> true_irf_svar(const Matrix& phi1, const Matrix& impact, std::size_t H,
                                  Ordering ordering = Ordering::correct);

} // namespace tsdml

#endif
