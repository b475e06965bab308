#pragma once

#include <stdexcept>
#include <string>

namespace villus {

enum class ErrorKind {
    InvalidParameter,
    InvalidInitialCondition,
    StepSize,
    InvalidProfile,
    SingularGeometry,
    AssumptionViolation,
    SolverFailure,
    UnsupportedGeometry,
    InvalidGrid,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for all library failures; `kind()` drives the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

}  // namespace villus
