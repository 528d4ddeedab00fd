#ifndef TSDML_IO_HPP
#define TSDML_IO_HPP

#include <map>
#include <string>

#include "tsdml/dataset.hpp"

namespace tsdml {

enum class Transform { none, diff, log_diff };

std::string to_string(Transform t);
Transform transform_from_string(const std::string& s);

struct TransformSpec {
    std::map<std::string, Transform> per_column; // absent columns default to none
    std::size_t lags = 3;
};

/// Column role map; the special role "time" marks the time-label column.
using RoleMap = std::map<std::string, std::string>;

/// Parse an RFC-4180-style CSV with a header row. Every column must be
/// covered by the role map; missing cells, non-numeric values and duplicate
/// time labels are hard errors.
TimeSeriesDataset load_csv(const std::string& path, const RoleMap& roles);

void write_csv(const std::string& path, const TimeSeriesDataset& data);

/// Apply per-column stationarity transforms first, then append lags 1..L of
/// every outcome/policy/control/channel column as extra controls. Channel
/// columns survive only as lags. Rows are trimmed to complete cases.
TimeSeriesDataset transform_and_lag(const TimeSeriesDataset& data, const TransformSpec& spec);

} // namespace tsdml

#endif
