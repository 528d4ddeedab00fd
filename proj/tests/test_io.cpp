#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tsdml/errors.hpp"
#include "tsdml/io.hpp"
#include "tsdml/rng.hpp"

using namespace tsdml;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("tsdml_io_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

RoleMap toy_roles() {
    return {{"date", "time"}, {"gdp", "outcome"}, {"cap", "policy"}, {"rate", "control"}};
}

} // namespace

TEST_CASE("load_csv parses a toy file with roles") {
    TempDir dir;
    const auto file = dir.path / "toy.csv";
    write_file(file,
               "date,gdp,cap,rate\n"
               "2001Q1,1.0,0.5,2.5\n"
               "2001Q2,1.1,0.6,2.4\n"
               "2001Q3,1.2,0.7,2.3\n");
    const TimeSeriesDataset data = load_csv(file.string(), toy_roles());
    CHECK(data.T() == 3);
    CHECK(data.n_columns() == 3);
    CHECK(data.outcome() == std::vector<double>{1.0, 1.1, 1.2});
    CHECK(data.policy()[2] == 0.7);
    CHECK(data.time_labels()[0] == "2001Q1");
}

TEST_CASE("load_csv reports missing cells with their location") {
    TempDir dir;
    const auto file = dir.path / "gap.csv";
    write_file(file,
               "date,gdp,cap,rate\n"
               "2001Q1,1.0,0.5,2.5\n"
               "2001Q2,,0.6,2.4\n");
    CHECK_THROWS_WITH_AS(load_csv(file.string(), toy_roles()),
                         doctest::Contains("row 3, column 'gdp'"), IoError);
}

TEST_CASE("load_csv rejects unknown roles, uncovered columns and duplicates") {
    TempDir dir;
    const auto file = dir.path / "f.csv";
    write_file(file, "date,gdp,cap,rate\n2001Q1,1,2,3\n");

    RoleMap missing = toy_roles();
    missing.erase("rate");
    CHECK_THROWS_WITH_AS(load_csv(file.string(), missing), doctest::Contains("rate"),
                         ConfigError);

    RoleMap bad = toy_roles();
    bad["rate"] = "covariate";
    CHECK_THROWS_AS(load_csv(file.string(), bad), ConfigError);

    write_file(file, "date,gdp,cap,rate\n2001Q1,1,2,3\n2001Q1,2,3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(file.string(), toy_roles()),
                         doctest::Contains("duplicate time label"), IoError);

    write_file(file, "date,gdp,cap,rate\n2001Q1,1,abc,3\n");
    CHECK_THROWS_WITH_AS(load_csv(file.string(), toy_roles()), doctest::Contains("non-numeric"),
                         IoError);
}

TEST_CASE("csv write/load round-trips values at full precision") {
    TempDir dir;
    RngStream rng(71, 0);
    std::vector<double> a(20);
    std::vector<double> b(20);
    std::vector<double> c(20);
    for (std::size_t t = 0; t < 20; ++t) {
        a[t] = rng.normal() * 1e-7;
        b[t] = rng.normal() * 1e9;
        c[t] = rng.next_double();
    }
    std::vector<std::string> labels(20);
    for (std::size_t t = 0; t < 20; ++t) labels[t] = "t," + std::to_string(t); // needs quoting
    const TimeSeriesDataset data({"y", "d", "x"}, {a, b, c},
                                 {Role::outcome, Role::policy, Role::control}, labels);

    const auto file = dir.path / "round.csv";
    write_csv(file.string(), data);
    const TimeSeriesDataset back = load_csv(
        file.string(), {{"time", "time"}, {"y", "outcome"}, {"d", "policy"}, {"x", "control"}});
    CHECK(back.column(0) == a);
    CHECK(back.column(1) == b);
    CHECK(back.column(2) == c);
    CHECK(back.time_labels() == labels);
}

namespace {

TimeSeriesDataset lag_fixture(std::size_t T) {
    std::vector<double> y(T);
    std::vector<double> d(T);
    std::vector<double> x(T);
    std::vector<double> w(T);
    for (std::size_t t = 0; t < T; ++t) {
        y[t] = static_cast<double>(t + 1);
        d[t] = static_cast<double>(2 * t + 1);
        x[t] = static_cast<double>(t * t % 17);
        w[t] = std::exp(0.01 * static_cast<double>(t + 1));
    }
    return TimeSeriesDataset({"y", "d", "x", "w"}, {y, d, x, w},
                             {Role::outcome, Role::policy, Role::control, Role::channel});
}

} // namespace

TEST_CASE("transform_and_lag with no lags and no transforms only drops channels") {
    const TimeSeriesDataset data = lag_fixture(20);
    TransformSpec spec;
    spec.lags = 0;
    const TimeSeriesDataset out = transform_and_lag(data, spec);
    CHECK(out.T() == 20);
    CHECK(out.n_columns() == 3); // w dropped, nothing appended
    CHECK(out.names() == std::vector<std::string>{"y", "d", "x"});
    CHECK(out.column(0) == data.column(0));
}

TEST_CASE("transform_and_lag arithmetic of trimming and column counts") {
    const TimeSeriesDataset data = lag_fixture(100);
    TransformSpec spec;
    spec.lags = 3;
    const TimeSeriesDataset out = transform_and_lag(data, spec);
    CHECK(out.T() == 97);
    // 3 contemporaneous survivors + 3 lags of all 4 columns.
    CHECK(out.n_columns() == 3 + 3 * 4);

    // Lagged channel present, contemporaneous channel absent.
    bool has_w_lag = false;
    for (const auto& name : out.names()) {
        CHECK(name != "w");
        if (name == "w_lag2") has_w_lag = true;
    }
    CHECK(has_w_lag);

    // Lag columns really are shifted copies.
    std::size_t y_idx = 0;
    std::size_t ylag_idx = 0;
    for (std::size_t j = 0; j < out.n_columns(); ++j) {
        if (out.names()[j] == "y") y_idx = j;
        if (out.names()[j] == "y_lag3") ylag_idx = j;
    }
    for (std::size_t t = 3; t < out.T(); ++t)
        CHECK(out.column(ylag_idx)[t] == out.column(y_idx)[t - 3]);

    // Lagged outcome and policy enter the control matrix.
    const auto controls = out.control_names();
    CHECK(std::count(controls.begin(), controls.end(), "y_lag1") == 1);
    CHECK(std::count(controls.begin(), controls.end(), "d_lag1") == 1);
}

TEST_CASE("transforms apply before lagging and flag constants") {
    std::vector<double> level(30);
    std::vector<double> constant(30, 5.0);
    std::vector<double> d(30);
    for (std::size_t t = 0; t < 30; ++t) {
        level[t] = std::exp(0.05 * static_cast<double>(t));
        d[t] = static_cast<double>(t % 7) + 0.5;
    }
    const TimeSeriesDataset data({"y", "d", "c"}, {level, d, constant},
                                 {Role::outcome, Role::policy, Role::control});
    TransformSpec spec;
    spec.lags = 1;
    spec.per_column["y"] = Transform::log_diff;
    spec.per_column["c"] = Transform::diff;
    const TimeSeriesDataset out = transform_and_lag(data, spec);
    CHECK(out.T() == 28); // one row to differencing, one to the lag
    for (double v : out.outcome()) CHECK(v == doctest::Approx(0.05).epsilon(1e-9));
    bool flagged = false;
    for (const auto& note : out.notes) flagged = flagged || note.find("c") != std::string::npos;
    CHECK(flagged);

    // log_diff on a non-positive column is an error.
    TransformSpec bad;
    bad.per_column["d"] = Transform::log_diff;
    std::vector<double> with_zero = d;
    with_zero[4] = 0.0;
    const TimeSeriesDataset data2({"y", "d", "c"}, {level, with_zero, constant},
                                  {Role::outcome, Role::policy, Role::control});
    CHECK_THROWS_AS(transform_and_lag(data2, bad), std::invalid_argument);
}

TEST_CASE("time order is preserved through ingestion and transformation") {
    const TimeSeriesDataset data = lag_fixture(40);
    TransformSpec spec;
    spec.lags = 2;
    const TimeSeriesDataset out = transform_and_lag(data, spec);
    // Outcome column must remain strictly increasing (it was t+1).
    for (std::size_t t = 1; t < out.T(); ++t) CHECK(out.outcome()[t] > out.outcome()[t - 1]);
    const bool labels_consistent = !data.time_labels().empty() || out.time_labels().empty();
    REQUIRE(labels_consistent);
}

TEST_CASE("non-identity specs change the column count (no idempotence)") {
    const TimeSeriesDataset data = lag_fixture(30);
    TransformSpec spec;
    spec.lags = 1;
    const TimeSeriesDataset once = transform_and_lag(data, spec);
    const TimeSeriesDataset twice = transform_and_lag(once, spec);
    CHECK(once.n_columns() != data.n_columns());
    CHECK(twice.n_columns() != once.n_columns());
}

TEST_CASE("channel columns never reach the estimator control matrix") {
    const TimeSeriesDataset data = lag_fixture(25);
    const Matrix controls = data.controls();
    CHECK(controls.cols() == 1); // only "x"; "w" is a channel
}
