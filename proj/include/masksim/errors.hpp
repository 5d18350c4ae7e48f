#pragma once

#include <stdexcept>
#include <string>

namespace masksim {

/// Invalid parameters or scenario settings (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file.
struct ParseError : ConfigError {
    explicit ParseError(const std::string& what) : ConfigError(what) {}
};

/// Requested target cannot be reached (CLI exit code 3).
struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke a documented precondition.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Statistic is undefined on the given input (e.g. zero variance).
struct UndefinedStatistic : std::runtime_error {
    explicit UndefinedStatistic(const std::string& what) : std::runtime_error(what) {}
};

} // namespace masksim
