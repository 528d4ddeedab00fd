#include "tsdml/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include "tsdml/errors.hpp"

namespace tsdml {

std::string to_string(Role r) {
    switch (r) {
        case Role::outcome: return "outcome";
        case Role::policy: return "policy";
        case Role::control: return "control";
        default: return "channel";
    }
}

Role role_from_string(const std::string& s) {
    if (s == "outcome") return Role::outcome;
    if (s == "policy") return Role::policy;
    if (s == "control") return Role::control;
    if (s == "channel") return Role::channel;
    throw ConfigError("unknown column role: " + s);
}

TimeSeriesDataset::TimeSeriesDataset(std::vector<std::string> names,
                                     std::vector<std::vector<double>> columns,
                                     std::vector<Role> roles,
                                     std::vector<std::string> time_labels)
    : names_(std::move(names)),
      columns_(std::move(columns)),
      roles_(std::move(roles)),
      time_labels_(std::move(time_labels)) {
    if (names_.size() != columns_.size() || names_.size() != roles_.size())
        throw std::invalid_argument("TimeSeriesDataset: names/columns/roles size mismatch");
    if (columns_.empty()) throw std::invalid_argument("TimeSeriesDataset: no columns");
    length_ = columns_.front().size();
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].size() != length_)
            throw std::invalid_argument("TimeSeriesDataset: ragged column " + names_[j]);
        for (double v : columns_[j])
            if (!std::isfinite(v))
                throw std::invalid_argument("TimeSeriesDataset: non-finite value in column " +
                                            names_[j]);
    }
    if (!time_labels_.empty() && time_labels_.size() != length_)
        throw std::invalid_argument("TimeSeriesDataset: time label length mismatch");

    std::size_t n_outcome = 0;
    std::size_t n_policy = 0;
    for (std::size_t j = 0; j < roles_.size(); ++j) {
        if (roles_[j] == Role::outcome) {
            outcome_index_ = j;
            ++n_outcome;
        } else if (roles_[j] == Role::policy) {
            policy_index_ = j;
            ++n_policy;
        }
    }
    if (n_outcome != 1 || n_policy != 1)
        throw std::invalid_argument(
            "TimeSeriesDataset: need exactly one outcome and one policy column");
}

Matrix TimeSeriesDataset::controls() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < roles_.size(); ++j)
        if (roles_[j] == Role::control) idx.push_back(j);
    Matrix m(length_, idx.size());
    for (std::size_t t = 0; t < length_; ++t)
        for (std::size_t j = 0; j < idx.size(); ++j) m(t, j) = columns_[idx[j]][t];
    return m;
}

std::vector<std::string> TimeSeriesDataset::control_names() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < roles_.size(); ++j)
        if (roles_[j] == Role::control) out.push_back(names_[j]);
    return out;
}

} // namespace tsdml
