#pragma once

#include <stdexcept>
#include <string>

namespace pani {

// Error taxonomy used across the library. Everything derives from std
// exception types so callers that only care about "it failed" can catch
// std::exception.

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedFormError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

// internal inconsistency (a quantity provably in range came out of range)
struct InconsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionBugError : std::logic_error {
    using std::logic_error::logic_error;
};

struct DegenerateLawError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    int line = 0;
    int column = 0;
    ConfigError(const std::string& msg, int line_ = 0, int column_ = 0)
        : std::runtime_error(msg), line(line_), column(column_) {}
};

}  // namespace pani
