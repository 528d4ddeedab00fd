#include "tsdml/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tsdml/errors.hpp"
#include "tsdml/linalg.hpp"

namespace tsdml {

std::string dgp_fingerprint(const DgpSpec& dgp) {
    return std::visit([](const auto& spec) { return spec.fingerprint(); }, dgp);
}

std::string to_string(BiasKind b) {
    return b == BiasKind::bias_of_mean ? "bias_of_mean" : "mean_abs_pct";
}

BiasKind bias_kind_from_string(const std::string& s) {
    if (s == "bias_of_mean") return BiasKind::bias_of_mean;
    if (s == "mean_abs_pct") return BiasKind::mean_abs_pct;
    throw std::invalid_argument("unknown bias kind: " + s);
}

std::string CellConfig::fingerprint(std::size_t replications, std::uint64_t seed) const {
    std::ostringstream os;
    os << dgp_fingerprint(dgp) << "|T=" << T << "|K=" << estimator.K << "|scheme="
       << to_string(estimator.scheme) << "|criterion=" << to_string(estimator.criterion)
       << "|grid=[" << estimator.grid.lambdas.front() << "," << estimator.grid.lambdas.back()
       << ";" << estimator.grid.size() << "]|l1=" << estimator.l1_ratio << "|window="
       << estimator.window << "|bw="
       << (estimator.bandwidth ? std::to_string(*estimator.bandwidth) : std::string("auto"))
       << "|bias=" << to_string(bias_kind) << "|reps=" << replications << "|seed=" << seed;
    return os.str();
}

ReplicationOutcome run_replication(const CellConfig& cell, std::uint64_t seed, std::uint64_t rep) {
    ReplicationOutcome out;
    try {
        RngStream rng(seed, rep);
        SimulatedSample sample =
            std::holds_alternative<SvarSpec>(cell.dgp)
                ? simulate_svar(std::get<SvarSpec>(cell.dgp), cell.T, rng)
                : simulate_plr(std::get<PlrSpec>(cell.dgp), cell.T, rng);
        const EstimateReport report = estimate(sample.dataset, cell.estimator);
        if (!report.all_converged) {
            out.failed = true;
            out.failure = "nuisance fit did not converge";
            return out;
        }
        out.theta_hat = report.theta_hat;
        out.theta_true = sample.theta_true;
        out.se = report.se;
        out.covered = std::abs(report.theta_hat - sample.theta_true) <= 1.96 * report.se;
    } catch (const std::exception& e) {
        out.failed = true;
        out.failure = e.what();
    }
    return out;
}

CellResult aggregate_outcomes(const std::vector<ReplicationOutcome>& outcomes, BiasKind kind) {
    CellResult res;
    double sum_theta = 0.0;
    double sum_true = 0.0;
    double sum_se = 0.0;
    double sum_abs_pct = 0.0;
    std::size_t covered = 0;
    for (const auto& o : outcomes) {
        if (o.failed) {
            ++res.n_failed;
            continue;
        }
        ++res.n_converged;
        sum_theta += o.theta_hat;
        sum_true += o.theta_true;
        sum_se += o.se;
        if (o.theta_true != 0.0)
            sum_abs_pct += 100.0 * std::abs(o.theta_hat - o.theta_true) / std::abs(o.theta_true);
        if (o.covered) ++covered;
    }
    if (res.n_converged == 0) throw NumericalError("run_cell: all replications failed");
    const auto n = static_cast<double>(res.n_converged);
    res.mean_theta_hat = sum_theta / n;
    res.mean_theta_true = sum_true / n;
    if (kind == BiasKind::bias_of_mean) {
        res.pct_bias = 100.0 * std::abs(res.mean_theta_hat - res.mean_theta_true) /
                       std::abs(res.mean_theta_true);
    } else {
        res.pct_bias = sum_abs_pct / n;
    }
    res.coverage = static_cast<double>(covered) / n;
    res.mean_se = sum_se / n;
    res.mc_se_coverage = std::sqrt(res.coverage * (1.0 - res.coverage) / n);
    res.low_convergence_flag =
        static_cast<double>(res.n_converged) < 0.9 * static_cast<double>(outcomes.size());
    return res;
}

namespace {

// Run f(r) for r = 0..n-1 over the requested number of worker threads. Work
// is claimed through an atomic counter; results land in slot r, so the
// aggregate is independent of scheduling.
template <typename F>
void parallel_for_index(std::size_t n, std::size_t threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t r = 0; r < n; ++r) f(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= n) return;
            f(r);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min(threads, n);
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace

CellResult run_cell(const CellConfig& cell, std::size_t replications, std::uint64_t seed,
                    std::size_t threads) {
    if (replications < 1) throw std::invalid_argument("run_cell: need replications >= 1");
    std::vector<ReplicationOutcome> outcomes(replications);
    parallel_for_index(replications, threads,
                       [&](std::size_t r) { outcomes[r] = run_replication(cell, seed, r); });
    return aggregate_outcomes(outcomes, cell.bias_kind);
}

nlohmann::json CellResult::to_json() const {
    return {{"pct_bias", pct_bias},
            {"coverage", coverage},
            {"mean_se", mean_se},
            {"mc_se_coverage", mc_se_coverage},
            {"n_converged", n_converged},
            {"n_failed", n_failed},
            {"low_convergence_flag", low_convergence_flag},
            {"mean_theta_hat", mean_theta_hat},
            {"mean_theta_true", mean_theta_true}};
}

CellResult CellResult::from_json(const nlohmann::json& j) {
    CellResult r;
    r.pct_bias = j.at("pct_bias").get<double>();
    r.coverage = j.at("coverage").get<double>();
    r.mean_se = j.at("mean_se").get<double>();
    r.mc_se_coverage = j.at("mc_se_coverage").get<double>();
    r.n_converged = j.at("n_converged").get<std::size_t>();
    r.n_failed = j.at("n_failed").get<std::size_t>();
    r.low_convergence_flag = j.at("low_convergence_flag").get<bool>();
    r.mean_theta_hat = j.at("mean_theta_hat").get<double>();
    r.mean_theta_true = j.at("mean_theta_true").get<double>();
    return r;
}

void ExperimentGrid::validate() const {
    if (replications < 1) throw std::invalid_argument("ExperimentGrid: replications >= 1");
    if (T_values.empty() || K_values.empty() || schemes.empty() || criteria.empty())
        throw std::invalid_argument("ExperimentGrid: empty axis");
    std::size_t min_T = T_values.front();
    for (std::size_t t : T_values) min_T = std::min(min_T, t);
    for (std::size_t k : K_values)
        if (k > min_T / 2)
            throw std::invalid_argument("ExperimentGrid: need K <= min(T)/2 for every K");
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

GridResult run_grid(const ExperimentGrid& grid, std::size_t threads,
                    const std::optional<std::string>& cache_dir) {
    grid.validate();
    if (cache_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*cache_dir, ec);
        if (ec) throw IoError("run_grid: cannot create cache directory " + *cache_dir);
    }

    GridResult result;
    for (std::size_t T : grid.T_values) {
        for (std::size_t K : grid.K_values) {
            for (Scheme scheme : grid.schemes) {
                for (Criterion criterion : grid.criteria) {
                    CellConfig cell;
                    cell.dgp = grid.dgp;
                    cell.T = T;
                    cell.estimator = grid.estimator;
                    cell.estimator.K = K;
                    cell.estimator.scheme = scheme;
                    cell.estimator.criterion = criterion;
                    cell.bias_kind = grid.bias_kind;

                    const std::string fp = cell.fingerprint(grid.replications, grid.base_seed);
                    std::filesystem::path cache_file;
                    bool from_cache = false;
                    CellResult cell_result;
                    if (cache_dir) {
                        std::ostringstream name;
                        name << "cell_" << std::hex << fnv1a(fp) << ".json";
                        cache_file = std::filesystem::path(*cache_dir) / name.str();
                        if (std::filesystem::exists(cache_file)) {
                            std::ifstream in(cache_file);
                            nlohmann::json j;
                            in >> j;
                            if (j.at("fingerprint").get<std::string>() == fp) {
                                cell_result = CellResult::from_json(j.at("result"));
                                from_cache = true;
                            }
                        }
                    }
                    if (!from_cache) {
                        cell_result = run_cell(cell, grid.replications, grid.base_seed, threads);
                        if (cache_dir) {
                            nlohmann::json j{{"fingerprint", fp},
                                             {"result", cell_result.to_json()}};
                            std::ofstream out(cache_file);
                            if (!out) throw IoError("run_grid: cannot write " + cache_file.string());
                            out << j.dump(2) << '\n';
                            if (!out) throw IoError("run_grid: write failed " + cache_file.string());
                        }
                    }
                    result.rows.push_back({T, K, scheme, criterion, cell_result});
                }
            }
        }
    }
    return result;
}

std::string GridResult::csv(const ExperimentGrid& grid) const {
    std::ostringstream os;
    os << "dgp,replications,seed,T,K,scheme,criterion,bias,coverage,mean_se,mc_se_coverage,"
          "n_failed,low_convergence_flag\n";
    for (const auto& row : rows) {
        os << dgp_fingerprint(grid.dgp) << ',' << grid.replications << ',' << grid.base_seed
           << ',' << row.T << ',' << row.K << ',' << to_string(row.scheme) << ','
           << to_string(row.criterion) << ',' << format_double(row.result.pct_bias) << ','
           << format_double(row.result.coverage) << ',' << format_double(row.result.mean_se)
           << ',' << format_double(row.result.mc_se_coverage) << ',' << row.result.n_failed << ','
           << (row.result.low_convergence_flag ? 1 : 0) << '\n';
    }
    return os.str();
}

LpGridResult lp_grid(const SvarSpec& dgp, const std::vector<std::size_t>& T_values, std::size_t K,
                     std::size_t H, std::size_t replications, std::uint64_t seed,
                     const EstimatorOptions& base_options, std::size_t threads) {
    if (replications < 1) throw std::invalid_argument("lp_grid: need replications >= 1");
    LpGridResult result;
    for (std::size_t T : T_values) {
        EstimatorOptions options = base_options;
        options.K = K;

        struct LpOutcome {
            bool failed = false;
            std::vector<double> theta_h;
            std::vector<double> se_h;
            std::vector<double> truth_h;
        };
        std::vector<LpOutcome> outcomes(replications);
        parallel_for_index(replications, threads, [&](std::size_t r) {
            LpOutcome& out = outcomes[r];
            try {
                RngStream rng(seed, r);
                SimulatedSample sample = simulate_svar(dgp, T, rng, H);
                const LpReport report = estimate_lp(sample.dataset, options, H);
                if (!report.all_converged) {
                    out.failed = true;
                    return;
                }
                out.theta_h = report.theta_h;
                out.se_h = report.se_h;
                out.truth_h = *sample.irf_true;
            } catch (const std::exception&) {
                out.failed = true;
            }
        });

        for (std::size_t h = 0; h <= H; ++h) {
            LpCellRow row;
            row.T = T;
            row.horizon = h;
            double sum_abs_bias = 0.0;
            double sum_se = 0.0;
            std::size_t covered = 0;
            std::size_t n_ok = 0;
            for (const auto& o : outcomes) {
                if (o.failed) continue;
                ++n_ok;
                sum_abs_bias += std::abs(o.theta_h[h] - o.truth_h[h]);
                sum_se += o.se_h[h];
                if (std::abs(o.theta_h[h] - o.truth_h[h]) <= 1.96 * o.se_h[h]) ++covered;
            }
            if (n_ok == 0) throw NumericalError("lp_grid: all replications failed");
            row.n_converged = n_ok;
            row.n_failed = outcomes.size() - n_ok;
            const auto n = static_cast<double>(n_ok);
            row.mean_abs_bias = sum_abs_bias / n;
            row.mean_se = sum_se / n;
            row.coverage = static_cast<double>(covered) / n;
            row.mc_se_coverage = std::sqrt(row.coverage * (1.0 - row.coverage) / n);
            result.rows.push_back(row);
        }
    }
    return result;
}

std::string LpGridResult::csv() const {
    std::ostringstream os;
    os << "T,horizon,mean_abs_bias,coverage,mean_se,mc_se_coverage,n_converged,n_failed\n";
    for (const auto& row : rows) {
        os << row.T << ',' << row.horizon << ',' << format_double(row.mean_abs_bias) << ','
           << format_double(row.coverage) << ',' << format_double(row.mean_se) << ','
           << format_double(row.mc_se_coverage) << ',' << row.n_converged << ',' << row.n_failed
           << '\n';
    }
    return os.str();
}

} // namespace tsdml
