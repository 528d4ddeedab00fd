#include "tsdml/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tsdml/errors.hpp"

namespace tsdml {

std::string to_string(Transform t) {
    switch (t) {
        case Transform::none: return "none";
        case Transform::diff: return "diff";
        default: return "log_diff";
    }
}

Transform transform_from_string(const std::string& s) {
    if (s == "none") return Transform::none;
    if (s == "diff") return Transform::diff;
    if (s == "log_diff") return Transform::log_diff;
    throw ConfigError("unknown transform: " + s);
}

namespace {

// One CSV record, honoring quoted fields; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\r') {
            // swallow; newline handling below
        } else if (c == '\n') {
            fields.push_back(field);
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
    if (!any) return false;
    fields.push_back(field);
    return true;
}

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

TimeSeriesDataset load_csv(const std::string& path, const RoleMap& roles) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_csv: cannot open " + path);

    std::vector<std::string> header;
    if (!read_record(in, header) || header.empty())
        throw IoError("load_csv: missing header row in " + path);

    for (const auto& name : header)
        if (roles.find(name) == roles.end())
            throw ConfigError("load_csv: column '" + name + "' has no role assigned");
    for (const auto& [name, role] : roles) {
        bool found = false;
        for (const auto& h : header) found = found || h == name;
        if (!found) throw ConfigError("load_csv: role map names unknown column '" + name + "'");
    }

    std::size_t time_col = std::numeric_limits<std::size_t>::max();
    std::vector<Role> column_roles(header.size(), Role::control);
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string& role = roles.at(header[j]);
        if (role == "time") {
            if (time_col != std::numeric_limits<std::size_t>::max())
                throw ConfigError("load_csv: more than one time column");
            time_col = j;
        } else {
            column_roles[j] = role_from_string(role);
        }
    }

    std::vector<std::vector<double>> columns(header.size());
    std::vector<std::string> time_labels;
    std::vector<std::string> fields;
    std::size_t row = 1;
    while (read_record(in, fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing newline
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "load_csv: row " << row << " has " << fields.size() << " fields, expected "
                << header.size();
            throw IoError(msg.str());
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (fields[j].empty()) {
                std::ostringstream msg;
                msg << "load_csv: missing value at row " << row << ", column '" << header[j]
                    << "'";
                throw IoError(msg.str());
            }
            if (j == time_col) {
                time_labels.push_back(fields[j]);
                continue;
            }
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[j], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != fields[j].size() || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << "load_csv: non-numeric value '" << fields[j] << "' at row " << row
                    << ", column '" << header[j] << "'";
                throw IoError(msg.str());
            }
            columns[j].push_back(v);
        }
    }

    if (time_col != std::numeric_limits<std::size_t>::max()) {
        std::set<std::string> seen;
        for (const auto& label : time_labels)
            if (!seen.insert(label).second)
                throw IoError("load_csv: duplicate time label '" + label + "'");
    }

    std::vector<std::string> names;
    std::vector<std::vector<double>> data;
    std::vector<Role> data_roles;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == time_col) continue;
        names.push_back(header[j]);
        data.push_back(std::move(columns[j]));
        data_roles.push_back(column_roles[j]);
    }
    return TimeSeriesDataset(std::move(names), std::move(data), std::move(data_roles),
                             std::move(time_labels));
}

void write_csv(const std::string& path, const TimeSeriesDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_csv: cannot open " + path + " for writing");
    const bool has_time = !data.time_labels().empty();
    if (has_time) out << "time,";
    for (std::size_t j = 0; j < data.n_columns(); ++j) {
        if (j) out << ',';
        out << quoted(data.names()[j]);
    }
    out << '\n';
    for (std::size_t t = 0; t < data.T(); ++t) {
        if (has_time) out << quoted(data.time_labels()[t]) << ',';
        for (std::size_t j = 0; j < data.n_columns(); ++j) {
            if (j) out << ',';
            out << format_value(data.column(j)[t]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write_csv: write failed for " + path);
}

TimeSeriesDataset transform_and_lag(const TimeSeriesDataset& data, const TransformSpec& spec) {
    const std::size_t T = data.T();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Transformed columns, with a leading NaN where differencing eats a row.
    std::vector<std::vector<double>> transformed(data.n_columns());
    std::vector<std::string> notes;
    for (std::size_t j = 0; j < data.n_columns(); ++j) {
        const auto& src = data.column(j);
        Transform tf = Transform::none;
        if (auto it = spec.per_column.find(data.names()[j]); it != spec.per_column.end())
            tf = it->second;
        std::vector<double> col(T, nan);
        switch (tf) {
            case Transform::none:
                col.assign(src.begin(), src.end());
                break;
            case Transform::diff:
                for (std::size_t t = 1; t < T; ++t) col[t] = src[t] - src[t - 1];
                break;
            case Transform::log_diff:
                for (std::size_t t = 0; t < T; ++t)
                    if (!(src[t] > 0.0))
                        throw std::invalid_argument(
                            "transform_and_lag: log_diff on non-positive values in column " +
                            data.names()[j]);
                for (std::size_t t = 1; t < T; ++t) col[t] = std::log(src[t] / src[t - 1]);
                break;
        }
        // Constant after transformation (ignoring the leading missing row).
        bool constant = true;
        bool first = true;
        double v0 = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            if (std::isnan(col[t])) continue;
            if (first) {
                v0 = col[t];
                first = false;
            } else if (col[t] != v0) {
                constant = false;
                break;
            }
        }
        if (constant) notes.push_back("constant column after transform: " + data.names()[j]);
        transformed[j] = std::move(col);
    }

    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<Role> roles;
    // Contemporaneous part: everything except channel columns.
    for (std::size_t j = 0; j < data.n_columns(); ++j) {
        if (data.roles()[j] == Role::channel) continue;
        names.push_back(data.names()[j]);
        columns.push_back(transformed[j]);
        roles.push_back(data.roles()[j]);
    }
    // Lags of every column (channels included) enter as controls.
    for (std::size_t lag = 1; lag <= spec.lags; ++lag) {
        for (std::size_t j = 0; j < data.n_columns(); ++j) {
            std::vector<double> col(T, nan);
            for (std::size_t t = lag; t < T; ++t) col[t] = transformed[j][t - lag];
            names.push_back(data.names()[j] + "_lag" + std::to_string(lag));
            columns.push_back(std::move(col));
            roles.push_back(Role::control);
        }
    }

    // Trim to complete cases; incompleteness is confined to the first rows.
    std::size_t first_complete = 0;
    for (std::size_t t = 0; t < T; ++t) {
        bool complete = true;
        for (const auto& col : columns) complete = complete && !std::isnan(col[t]);
        if (complete) {
            first_complete = t;
            break;
        }
        first_complete = t + 1;
    }
    if (first_complete >= T)
        throw std::invalid_argument("transform_and_lag: no complete rows remain");

    std::vector<std::vector<double>> final_columns;
    final_columns.reserve(columns.size());
    for (auto& col : columns)
        final_columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(first_complete),
                                   col.end());
    std::vector<std::string> labels;
    if (!data.time_labels().empty())
        labels.assign(data.time_labels().begin() + static_cast<std::ptrdiff_t>(first_complete),
                      data.time_labels().end());

    TimeSeriesDataset out(std::move(names), std::move(final_columns), std::move(roles),
                          std::move(labels));
    out.notes = std::move(notes);
    return out;
}

} // namespace tsdml
