#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tsdml/errors.hpp"
#include "tsdml/montecarlo.hpp"

using namespace tsdml;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tsdml_mc_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

SvarSpec tiny_svar() {
    SvarSpec spec;
    spec.n = 6;
    spec.band = 2;
    return spec;
}

EstimatorOptions mc_options() {
    EstimatorOptions opts;
    opts.grid = TuningGrid::linspace(0.1, 1.0, 5);
    opts.criterion = Criterion::rmse;
    return opts;
}

CellConfig tiny_cell(std::size_t T = 60, std::size_t K = 4) {
    CellConfig cell;
    cell.dgp = tiny_svar();
    cell.T = T;
    cell.estimator = mc_options();
    cell.estimator.K = K;
    return cell;
}

} // namespace

TEST_CASE("run_cell is bit-identical across thread counts") {
    const CellConfig cell = tiny_cell();
    const CellResult one = run_cell(cell, 12, 7, 1);
    const CellResult four = run_cell(cell, 12, 7, 4);
    CHECK(one.pct_bias == four.pct_bias);
    CHECK(one.coverage == four.coverage);
    CHECK(one.mean_se == four.mean_se);
    CHECK(one.mean_theta_hat == four.mean_theta_hat);
    CHECK(one.n_converged == four.n_converged);
}

TEST_CASE("replication outcomes aggregate with failure accounting") {
    std::vector<ReplicationOutcome> outcomes;
    for (int i = 0; i < 8; ++i) {
        ReplicationOutcome o;
        o.theta_hat = 0.6;
        o.theta_true = 0.5;
        o.se = 0.1;
        o.covered = i < 6; // 6 of 8 covered
        outcomes.push_back(o);
    }
    ReplicationOutcome failed;
    failed.failed = true;
    outcomes.push_back(failed);
    outcomes.push_back(failed);

    const CellResult res = aggregate_outcomes(outcomes, BiasKind::bias_of_mean);
    CHECK(res.n_converged == 8);
    CHECK(res.n_failed == 2);
    CHECK(res.pct_bias == doctest::Approx(20.0).epsilon(1e-12)); // |0.6-0.5|/0.5
    CHECK(res.coverage == doctest::Approx(0.75));
    CHECK(res.mean_se == doctest::Approx(0.1));
    CHECK(res.low_convergence_flag); // 8/10 < 90%
    CHECK(res.mc_se_coverage ==
          doctest::Approx(std::sqrt(0.75 * 0.25 / 8.0)).epsilon(1e-12));

    const CellResult mape = aggregate_outcomes(outcomes, BiasKind::mean_abs_pct);
    CHECK(mape.pct_bias == doctest::Approx(20.0).epsilon(1e-12));

    std::vector<ReplicationOutcome> all_failed(3, failed);
    CHECK_THROWS_AS(aggregate_outcomes(all_failed, BiasKind::bias_of_mean), NumericalError);
}

TEST_CASE("unconfounded PLR cell has small bias and near-nominal coverage") {
    CellConfig cell;
    PlrSpec plr;
    plr.p = 20;
    plr.rho = 0.0;
    plr.cor = 0.0;
    plr.coef_scale = 0.0;
    cell.dgp = plr;
    cell.T = 2000;
    cell.estimator = mc_options();
    cell.estimator.K = 5;
    cell.estimator.grid = TuningGrid::linspace(0.01, 0.1, 5);
    cell.estimator.l1_ratio = 0.99;

    const CellResult res = run_cell(cell, 200, 11, 1);
    CHECK(res.n_failed == 0);
    CHECK(res.pct_bias < 1.0);
    CHECK(res.coverage >= 0.90);
    CHECK(res.coverage <= 0.99);
}

TEST_CASE("grid has one row per cell with provenance columns and a cache") {
    TempDir dir;
    ExperimentGrid grid;
    grid.dgp = tiny_svar();
    grid.T_values = {40, 60, 80};
    grid.K_values = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    grid.schemes = {Scheme::rcf};
    grid.criteria = {Criterion::rmse, Criterion::goldilocks};
    grid.replications = 2;
    grid.base_seed = 3;
    grid.estimator = mc_options();

    const GridResult result = run_grid(grid, 1, dir.path.string());
    CHECK(result.rows.size() == 3 * 9 * 2);
    const std::string csv = result.csv(grid);
    CHECK(csv.find("dgp,replications,seed,T,K,scheme,criterion,bias,coverage") == 0);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 1 + 3 * 9 * 2);

    // Cache files were written, and a re-run reproduces the same output.
    std::size_t cache_files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
        (void)entry;
        ++cache_files;
    }
    CHECK(cache_files == 3 * 9 * 2);
    const GridResult again = run_grid(grid, 1, dir.path.string());
    CHECK(again.csv(grid) == csv);
}

TEST_CASE("grid validation enforces K <= min(T)/2") {
    ExperimentGrid grid;
    grid.dgp = tiny_svar();
    grid.T_values = {40};
    grid.K_values = {21};
    grid.estimator = mc_options();
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

TEST_CASE("lp grid at horizon zero matches the static cell on identical seeds") {
    SvarSpec spec = tiny_svar();
    EstimatorOptions opts = mc_options();
    const std::size_t reps = 10;
    const std::uint64_t seed = 19;

    const LpGridResult lp = lp_grid(spec, {60}, 4, 0, reps, seed, opts, 1);
    REQUIRE(lp.rows.size() == 1);

    CellConfig cell = tiny_cell(60, 4);
    const CellResult statics = run_cell(cell, reps, seed, 1);
    CHECK(lp.rows[0].coverage == statics.coverage);
    CHECK(lp.rows[0].mean_se == statics.mean_se);
    CHECK(lp.rows[0].n_converged == statics.n_converged);
}

TEST_CASE("lp grid reports one row per horizon with finite summaries") {
    SvarSpec spec = tiny_svar();
    EstimatorOptions opts = mc_options();
    const LpGridResult lp = lp_grid(spec, {60, 80}, 4, 3, 5, 23, opts, 2);
    REQUIRE(lp.rows.size() == 2 * 4);
    for (const auto& row : lp.rows) {
        CHECK(std::isfinite(row.mean_abs_bias));
        CHECK(row.coverage >= 0.0);
        CHECK(row.coverage <= 1.0);
    }
    const std::string csv = lp.csv();
    CHECK(csv.find("T,horizon,mean_abs_bias") == 0);
}

TEST_CASE("cell fingerprints distinguish configurations") {
    const CellConfig a = tiny_cell(60, 4);
    CellConfig b = tiny_cell(60, 5);
    CHECK(a.fingerprint(10, 1) != b.fingerprint(10, 1));
    CHECK(a.fingerprint(10, 1) != a.fingerprint(11, 1));
    CHECK(a.fingerprint(10, 1) != a.fingerprint(10, 2));
    CHECK(a.fingerprint(10, 1) == a.fingerprint(10, 1));
}
