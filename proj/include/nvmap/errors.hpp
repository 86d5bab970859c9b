#pragma once

#include <stdexcept>
#include <string>

namespace nvmap {

// Invalid argument to a model function (precondition violated).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing, unreadable, or inconsistent data files.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite cost, failed convergence and similar.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nvmap
