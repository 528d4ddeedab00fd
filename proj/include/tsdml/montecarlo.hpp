#ifndef TSDML_MONTECARLO_HPP
#define TSDML_MONTECARLO_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tsdml/dgp.hpp"
#include "tsdml/estimator.hpp"

namespace tsdml {

using DgpSpec = std::variant<SvarSpec, PlrSpec>;

std::string dgp_fingerprint(const DgpSpec& dgp);

enum class BiasKind { bias_of_mean, mean_abs_pct };

std::string to_string(BiasKind b);
BiasKind bias_kind_from_string(const std::string& s);

struct CellConfig {
    DgpSpec dgp;
    std::size_t T = 200;
    EstimatorOptions estimator;
    BiasKind bias_kind = BiasKind::bias_of_mean;

    std::string fingerprint(std::size_t replications, std::uint64_t seed) const;
};

struct ReplicationOutcome {
    bool failed = false;
    std::string failure;
    double theta_hat = 0.0;
    double theta_true = 0.0;
    double se = 0.0;
    bool covered = false;
};

struct CellResult {
    double pct_bias = 0.0;
    double coverage = 0.0;
    double mean_se = 0.0;
    double mc_se_coverage = 0.0; // sqrt(p(1-p)/n)
    std::size_t n_converged = 0;
    std::size_t n_failed = 0;
    bool low_convergence_flag = false; // fewer than 90% of replications usable
    double mean_theta_hat = 0.0;
    double mean_theta_true = 0.0;

    nlohmann::json to_json() const;
    static CellResult from_json(const nlohmann::json& j);
};

/// Aggregate per-replication outcomes into a cell summary (exposed for
/// direct testing of the failure accounting).
CellResult aggregate_outcomes(const std::vector<ReplicationOutcome>& outcomes, BiasKind kind);

ReplicationOutcome run_replication(const CellConfig& cell, std::uint64_t seed, std::uint64_t rep);

CellResult run_cell(const CellConfig& cell, std::size_t replications, std::uint64_t seed,
                    std::size_t threads = 1);

struct ExperimentGrid {
    DgpSpec dgp;
    std::vector<std::size_t> T_values;
    std::vector<std::size_t> K_values;
    std::vector<Scheme> schemes;
    std::vector<Criterion> criteria;
    std::size_t replications = 500;
    std::uint64_t base_seed = 1;
    EstimatorOptions estimator; // K/scheme/criterion overridden per cell
    BiasKind bias_kind = BiasKind::bias_of_mean;

    void validate() const;
};

struct GridRow {
    std::size_t T = 0;
    std::size_t K = 0;
    Scheme scheme = Scheme::rcf;
    Criterion criterion = Criterion::rmse;
    CellResult result;
};

struct GridResult {
    std::vector<GridRow> rows;
    std::string csv(const ExperimentGrid& grid) const;
};

/// Runs every cell of the grid; completed cells are cached on disk by
/// fingerprint when cache_dir is set, so interrupted runs resume.
GridResult run_grid(const ExperimentGrid& grid, std::size_t threads = 1,
                    const std::optional<std::string>& cache_dir = std::nullopt);

struct LpCellRow {
    std::size_t T = 0;
    std::size_t horizon = 0;
    double mean_abs_bias = 0.0;
    double coverage = 0.0;
    double mean_se = 0.0;
    double mc_se_coverage = 0.0;
    std::size_t n_converged = 0;
    std::size_t n_failed = 0;
};

struct LpGridResult {
    std::vector<LpCellRow> rows;
    std::string csv() const;
};

/// Per-horizon absolute bias and coverage of the local-projection estimator.
LpGridResult lp_grid(const SvarSpec& dgp, const std::vector<std::size_t>& T_values, std::size_t K,
                     std::size_t H, std::size_t replications, std::uint64_t seed,
                     const EstimatorOptions& base_options, std::size_t threads = 1);

} // namespace tsdml

#endif
