#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsdml/dgp.hpp"
#include "tsdml/errors.hpp"
#include "tsdml/estimator.hpp"
#include "tsdml/io.hpp"
#include "tsdml/montecarlo.hpp"

namespace {

using nlohmann::json;
using namespace tsdml;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

struct DgpConfig {
    DgpSpec spec;
    std::size_t T = 0;
    std::string type;
};

DgpConfig parse_dgp(const json& j) {
    check_keys(j, {"type", "T", "n", "band", "kappa", "alpha_decay", "beta_decay", "delta",
                   "omega", "gamma", "rho_star", "d_min", "d_max", "mu", "burn_in", "ordering",
                   "garch", "p", "rho", "cor", "theta0", "coef_scale", "sigma_xi", "sigma_eps"},
               "dgp");
    DgpConfig out;
    if (!j.contains("type")) throw ConfigError("dgp: missing 'type'");
    out.type = j.at("type").get<std::string>();
    out.T = get_or<std::size_t>(j, "T", 200);
    if (out.type == "svar") {
        SvarSpec spec;
        spec.n = get_or<std::size_t>(j, "n", spec.n);
        spec.band = get_or<std::size_t>(j, "band", spec.band);
        spec.kappa = get_or<double>(j, "kappa", spec.kappa);
        spec.alpha_decay = get_or<double>(j, "alpha_decay", spec.alpha_decay);
        spec.beta_decay = get_or<double>(j, "beta_decay", spec.beta_decay);
        spec.delta = get_or<double>(j, "delta", spec.delta);
        spec.omega = get_or<double>(j, "omega", spec.omega);
        spec.gamma = get_or<double>(j, "gamma", spec.gamma);
        spec.rho_star = get_or<double>(j, "rho_star", spec.rho_star);
        spec.d_min = get_or<double>(j, "d_min", spec.d_min);
        spec.d_max = get_or<double>(j, "d_max", spec.d_max);
        spec.mu = get_or<double>(j, "mu", spec.mu);
        spec.burn_in = get_or<std::size_t>(j, "burn_in", spec.burn_in);
        if (j.contains("ordering"))
            spec.ordering = ordering_from_string(j.at("ordering").get<std::string>());
        if (j.contains("garch") && !j.at("garch").is_null()) {
            check_keys(j.at("garch"), {"omega", "alpha", "beta"}, "dgp.garch");
            GarchSpec g;
            g.omega = get_or<double>(j.at("garch"), "omega", g.omega);
            g.alpha = get_or<double>(j.at("garch"), "alpha", g.alpha);
            g.beta = get_or<double>(j.at("garch"), "beta", g.beta);
            spec.garch = g;
        }
        spec.validate();
        out.spec = spec;
    } else if (out.type == "plr") {
        PlrSpec spec;
        spec.p = get_or<std::size_t>(j, "p", spec.p);
        spec.rho = get_or<double>(j, "rho", spec.rho);
        spec.cor = get_or<double>(j, "cor", spec.cor);
        spec.theta0 = get_or<double>(j, "theta0", spec.theta0);
        spec.burn_in = get_or<std::size_t>(j, "burn_in", spec.burn_in);
        spec.coef_scale = get_or<double>(j, "coef_scale", spec.coef_scale);
        spec.sigma_xi = get_or<double>(j, "sigma_xi", spec.sigma_xi);
        spec.sigma_eps = get_or<double>(j, "sigma_eps", spec.sigma_eps);
        spec.validate();
        out.spec = spec;
    } else {
        throw ConfigError("dgp: unknown type '" + out.type + "' (expected 'svar' or 'plr')");
    }
    return out;
}

struct DatasetConfig {
    std::string path;
    RoleMap roles;
    TransformSpec transforms;
};

DatasetConfig parse_dataset(const json& j) {
    check_keys(j, {"path", "roles", "transforms", "lags"}, "dataset");
    DatasetConfig out;
    if (!j.contains("path")) throw ConfigError("dataset: missing 'path'");
    out.path = j.at("path").get<std::string>();
    if (!j.contains("roles")) throw ConfigError("dataset: missing 'roles'");
    for (const auto& [name, role] : j.at("roles").items())
        out.roles[name] = role.get<std::string>();
    if (j.contains("transforms"))
        for (const auto& [name, tf] : j.at("transforms").items())
            out.transforms.per_column[name] = transform_from_string(tf.get<std::string>());
    out.transforms.lags = get_or<std::size_t>(j, "lags", 3);
    return out;
}

// Tuning defaults follow the simulation designs for generated data (Lasso on
// a [0.1, 1] grid for the SVAR, near-Lasso on [0.01, 0.1] for the PLR) and
// the empirical configuration (K = 8, 10000-point grid, stability criterion)
// for datasets read from disk.
EstimatorOptions parse_estimator(const json& root, const std::optional<DgpConfig>& dgp,
                                 bool dataset_mode) {
    EstimatorOptions opts;
    if (dataset_mode) {
        opts.K = 8;
        opts.criterion = Criterion::goldilocks;
        opts.grid = TuningGrid::linspace(0.001, 1.0, 10000);
        opts.l1_ratio = 1.0;
    } else if (dgp && dgp->type == "plr") {
        opts.K = 5;
        opts.criterion = Criterion::goldilocks;
        opts.grid = TuningGrid::linspace(0.01, 0.1, 10);
        opts.l1_ratio = 0.99;
    } else {
        opts.K = 8;
        opts.criterion = Criterion::rmse;
        opts.grid = TuningGrid::linspace(0.1, 1.0, 10);
        opts.l1_ratio = 1.0;
    }
    if (!root.contains("estimator")) return opts;
    const json& j = root.at("estimator");
    check_keys(j, {"K", "scheme", "criterion", "grid", "l1_ratio", "bandwidth", "window", "tol",
                   "max_iter"},
               "estimator");
    opts.K = get_or<std::size_t>(j, "K", opts.K);
    if (j.contains("scheme")) opts.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("criterion"))
        opts.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    if (j.contains("grid")) {
        check_keys(j.at("grid"), {"min", "max", "count"}, "estimator.grid");
        opts.grid = TuningGrid::linspace(j.at("grid").at("min").get<double>(),
                                         j.at("grid").at("max").get<double>(),
                                         j.at("grid").at("count").get<std::size_t>());
    }
    opts.l1_ratio = get_or<double>(j, "l1_ratio", opts.l1_ratio);
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null())
        opts.bandwidth = j.at("bandwidth").get<std::size_t>();
    opts.window = get_or<std::size_t>(j, "window", opts.window);
    opts.tol = get_or<double>(j, "tol", opts.tol);
    opts.max_iter = get_or<std::size_t>(j, "max_iter", opts.max_iter);
    return opts;
}

json estimator_to_json(const EstimatorOptions& o) {
    json grid{{"min", o.grid.lambdas.front()},
              {"max", o.grid.lambdas.back()},
              {"count", o.grid.size()}};
    json j{{"K", o.K},
           {"scheme", to_string(o.scheme)},
           {"criterion", to_string(o.criterion)},
           {"grid", grid},
           {"l1_ratio", o.l1_ratio},
           {"window", o.window},
           {"tol", o.tol},
           {"max_iter", o.max_iter}};
    if (o.bandwidth) j["bandwidth"] = *o.bandwidth;
    else j["bandwidth"] = nullptr;
    return j;
}

struct AppConfig {
    json raw;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string output_dir = "out";
    std::optional<DgpConfig> dgp;
    std::optional<DatasetConfig> dataset;
    EstimatorOptions estimator;
    std::size_t lp_horizons = 8;
    // Monte Carlo section.
    std::size_t replications = 500;
    std::uint64_t mc_seed = 1;
    std::vector<std::size_t> T_values;
    std::vector<std::size_t> K_values;
    std::vector<Scheme> schemes{Scheme::rcf};
    std::vector<Criterion> criteria{Criterion::rmse};
    BiasKind bias_kind = BiasKind::bias_of_mean;
    std::optional<std::string> cache_dir;
    std::string mc_mode = "static";
    std::size_t mc_lp_K = 10;
    std::size_t mc_lp_H = 7;
    bool has_mc = false;
};

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    check_keys(j, {"seed", "threads", "output_dir", "dgp", "dataset", "estimator", "lp",
                   "montecarlo"},
               "config");

    AppConfig cfg;
    cfg.raw = j;
    cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
    cfg.threads = get_or<std::size_t>(j, "threads", 1);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
    if (j.contains("dgp")) cfg.dgp = parse_dgp(j.at("dgp"));
    if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
    cfg.estimator = parse_estimator(j, cfg.dgp, cfg.dataset.has_value());
    if (j.contains("lp")) {
        check_keys(j.at("lp"), {"horizons"}, "lp");
        cfg.lp_horizons = get_or<std::size_t>(j.at("lp"), "horizons", 8);
    }
    if (j.contains("montecarlo")) {
        cfg.has_mc = true;
        const json& mc = j.at("montecarlo");
        check_keys(mc, {"replications", "seed", "T_values", "K_values", "schemes", "criteria",
                        "bias", "cache_dir", "mode", "lp_K", "lp_H"},
                   "montecarlo");
        cfg.replications = get_or<std::size_t>(mc, "replications", 500);
        cfg.mc_seed = get_or<std::uint64_t>(mc, "seed", cfg.seed);
        if (mc.contains("T_values")) cfg.T_values = mc.at("T_values").get<std::vector<std::size_t>>();
        if (mc.contains("K_values")) cfg.K_values = mc.at("K_values").get<std::vector<std::size_t>>();
        if (mc.contains("schemes")) {
            cfg.schemes.clear();
            for (const auto& s : mc.at("schemes")) cfg.schemes.push_back(scheme_from_string(s));
        }
        if (mc.contains("criteria")) {
            cfg.criteria.clear();
            for (const auto& c : mc.at("criteria"))
                cfg.criteria.push_back(criterion_from_string(c));
        }
        if (mc.contains("bias")) cfg.bias_kind = bias_kind_from_string(mc.at("bias"));
        if (mc.contains("cache_dir")) cfg.cache_dir = mc.at("cache_dir").get<std::string>();
        cfg.mc_mode = get_or<std::string>(mc, "mode", "static");
        cfg.mc_lp_K = get_or<std::size_t>(mc, "lp_K", 10);
        cfg.mc_lp_H = get_or<std::size_t>(mc, "lp_H", 7);
        if (cfg.mc_mode != "static" && cfg.mc_mode != "lp")
            throw ConfigError("montecarlo: mode must be 'static' or 'lp'");
    }
    return cfg;
}

json resolved_config(const AppConfig& cfg) {
    json j = cfg.raw;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["output_dir"] = cfg.output_dir;
    j["estimator"] = estimator_to_json(cfg.estimator);
    return j;
}

std::filesystem::path prepare_output_dir(const AppConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

SimulatedSample simulate_from_config(const AppConfig& cfg,
                                     std::optional<std::size_t> irf_horizons = std::nullopt) {
    RngStream rng(cfg.seed, 0);
    const DgpConfig& dgp = *cfg.dgp;
    if (std::holds_alternative<SvarSpec>(dgp.spec))
        return simulate_svar(std::get<SvarSpec>(dgp.spec), dgp.T, rng, irf_horizons);
    return simulate_plr(std::get<PlrSpec>(dgp.spec), dgp.T, rng);
}

int cmd_simulate(const AppConfig& cfg) {
    if (!cfg.dgp) throw ConfigError("simulate: config needs a 'dgp' section");
    const auto dir = prepare_output_dir(cfg);
    const SimulatedSample sample = simulate_from_config(cfg);
    write_csv((dir / "dataset.csv").string(), sample.dataset);

    json roles;
    roles["time"] = "time";
    for (std::size_t c = 0; c < sample.dataset.n_columns(); ++c)
        roles[sample.dataset.names()[c]] = to_string(sample.dataset.roles()[c]);
    json meta{{"theta_true", sample.theta_true},
              {"fingerprint", sample.fingerprint},
              {"roles", roles},
              {"seed", cfg.seed},
              {"config", resolved_config(cfg)}};
    write_text(dir / "dataset_meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << (dir / "dataset.csv").string() << " (T = " << sample.dataset.T()
              << ", theta_true = " << sample.theta_true << ")\n";
    return kExitOk;
}

TimeSeriesDataset dataset_from_config(const AppConfig& cfg) {
    if (cfg.dataset) {
        const TimeSeriesDataset raw = load_csv(cfg.dataset->path, cfg.dataset->roles);
        return transform_and_lag(raw, cfg.dataset->transforms);
    }
    if (cfg.dgp) return simulate_from_config(cfg).dataset;
    throw ConfigError("config needs either a 'dataset' or a 'dgp' section");
}

int cmd_estimate(const AppConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const TimeSeriesDataset data = dataset_from_config(cfg);
    const EstimateReport report = estimate(data, cfg.estimator);
    json out = report.to_json();
    out["config"] = resolved_config(cfg);
    out["seed"] = cfg.seed;
    write_text(dir / "estimate_report.json", out.dump(2) + "\n");
    std::cout << "theta_hat = " << report.theta_hat << ", se = " << report.se << ", ci95 = ["
              << report.ci95[0] << ", " << report.ci95[1] << "]\n";
    return kExitOk;
}

int cmd_lp(const AppConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const TimeSeriesDataset data = dataset_from_config(cfg);
    const LpReport report = estimate_lp(data, cfg.estimator, cfg.lp_horizons);
    json out = report.to_json();
    out["config"] = resolved_config(cfg);
    out["seed"] = cfg.seed;
    write_text(dir / "lp_report.json", out.dump(2) + "\n");
    const std::string header = "# config: " + resolved_config(cfg).dump() + "\n";
    write_text(dir / "irf.csv", header + report.irf_csv());
    std::cout << "wrote " << (dir / "irf.csv").string() << " (horizons 0.." << report.horizons
              << ")\n";
    return kExitOk;
}

int cmd_montecarlo(const AppConfig& cfg) {
    if (!cfg.dgp) throw ConfigError("montecarlo: config needs a 'dgp' section");
    if (!cfg.has_mc) throw ConfigError("montecarlo: config needs a 'montecarlo' section");
    const auto dir = prepare_output_dir(cfg);
    const std::string header = "# config: " + resolved_config(cfg).dump() + "\n";

    if (cfg.mc_mode == "lp") {
        if (!std::holds_alternative<SvarSpec>(cfg.dgp->spec))
            throw ConfigError("montecarlo: lp mode needs an svar dgp");
        std::vector<std::size_t> T_values = cfg.T_values;
        if (T_values.empty()) T_values = {cfg.dgp->T};
        const LpGridResult result =
            lp_grid(std::get<SvarSpec>(cfg.dgp->spec), T_values, cfg.mc_lp_K, cfg.mc_lp_H,
                    cfg.replications, cfg.mc_seed, cfg.estimator, cfg.threads);
        write_text(dir / "lp_grid.csv", header + result.csv());
        std::cout << "wrote " << (dir / "lp_grid.csv").string() << "\n";
        return kExitOk;
    }

    ExperimentGrid grid;
    grid.dgp = cfg.dgp->spec;
    grid.T_values = cfg.T_values.empty() ? std::vector<std::size_t>{cfg.dgp->T} : cfg.T_values;
    grid.K_values = cfg.K_values.empty() ? std::vector<std::size_t>{cfg.estimator.K} : cfg.K_values;
    grid.schemes = cfg.schemes;
    grid.criteria = cfg.criteria;
    grid.replications = cfg.replications;
    grid.base_seed = cfg.mc_seed;
    grid.estimator = cfg.estimator;
    grid.bias_kind = cfg.bias_kind;

    std::optional<std::string> cache = cfg.cache_dir;
    if (!cache) cache = (dir / "cache").string();
    const GridResult result = run_grid(grid, cfg.threads, cache);
    write_text(dir / "grid.csv", header + result.csv(grid));
    std::cout << "wrote " << (dir / "grid.csv").string() << " (" << result.rows.size()
              << " cells)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-fitted double machine learning for time series"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> threads_override;
    std::optional<std::size_t> replications_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Path to the JSON run configuration")
            ->required();
        sub->add_option("--out", out_dir, "Output directory (overrides config)");
        sub->add_option("--seed", seed_override, "Seed override");
        sub->add_option("--threads", threads_override, "Worker threads (default 1)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Generate a dataset from a simulation design");
    CLI::App* est = app.add_subcommand("estimate", "Estimate the policy effect on one dataset");
    CLI::App* lp = app.add_subcommand("lp", "Estimate impulse responses by local projections");
    CLI::App* mc = app.add_subcommand("montecarlo", "Run a replication grid");
    for (CLI::App* sub : {sim, est, lp, mc}) add_common(sub);
    mc->add_option("--replications", replications_override, "Replication override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        AppConfig cfg = load_config(config_path);
        if (out_dir) cfg.output_dir = *out_dir;
        if (seed_override) {
            cfg.seed = *seed_override;
            cfg.mc_seed = *seed_override;
        }
        if (threads_override) cfg.threads = *threads_override;
        if (replications_override) cfg.replications = *replications_override;

        if (sim->parsed()) return cmd_simulate(cfg);
        if (est->parsed()) return cmd_estimate(cfg);
        if (lp->parsed()) return cmd_lp(cfg);
        if (mc->parsed()) return cmd_montecarlo(cfg);
        throw ConfigError("no subcommand selected");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
