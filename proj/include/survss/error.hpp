#pragma once

#include <stdexcept>
#include <string>

namespace survss {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Numerical = 4,
    Infeasible = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error config_error(const std::string& what) { return {ErrorKind::Config, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::Data, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }
inline Error infeasible_error(const std::string& what) { return {ErrorKind::Infeasible, what}; }

}  // namespace survss
