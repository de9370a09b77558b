#pragma once

#include <stdexcept>
#include <string>

namespace simlearn {

/// Raised when an iteration produces non-finite values or fails to converge.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input files (CSV, JSON documents).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace simlearn
