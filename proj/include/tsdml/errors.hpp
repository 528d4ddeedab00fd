#ifndef TSDML_ERRORS_HPP
#define TSDML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tsdml {

/// Numerical failure: rank deficiency, weak residualization, degenerate folds.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File parsing or filesystem failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tsdml

#endif
