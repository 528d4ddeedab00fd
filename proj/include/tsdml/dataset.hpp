#ifndef TSDML_DATASET_HPP
#define TSDML_DATASET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "tsdml/matrix.hpp"

namespace tsdml {

enum class Role { outcome, policy, control, channel };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

/// Ordered time-series observations with named columns and column roles.
/// Exactly one outcome and one policy column; values must be finite.
class TimeSeriesDataset {
public:
    TimeSeriesDataset() = default;
    TimeSeriesDataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                      std::vector<Role> roles, std::vector<std::string> time_labels = {});

    std::size_t T() const { return length_; }
    std::size_t n_columns() const { return names_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Role>& roles() const { return roles_; }
    const std::vector<std::string>& time_labels() const { return time_labels_; }
    const std::vector<double>& column(std::size_t j) const { return columns_[j]; }

    std::size_t outcome_index() const { return outcome_index_; }
    std::size_t policy_index() const { return policy_index_; }
    const std::vector<double>& outcome() const { return columns_[outcome_index_]; }
    const std::vector<double>& policy() const { return columns_[policy_index_]; }

    /// Control-role columns as a row-major matrix; channel columns are never
    /// included contemporaneously.
    Matrix controls() const;
    std::vector<std::string> control_names() const;

    /// Columns flagged as constant by ingestion or transformation.
    std::vector<std::string> notes;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::vector<Role> roles_;
    std::vector<std::string> time_labels_;
    std::size_t length_ = 0;
    std::size_t outcome_index_ = 0;
    std::size_t policy_index_ = 0;
};

} // namespace tsdml

#endif
