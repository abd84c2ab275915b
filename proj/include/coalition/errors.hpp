#pragma once

#include <stdexcept>
#include <string>

namespace coalition {

// Input or contract violation: malformed files, illegal orders, broken
// invariants. The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed document (JSON, TSV, order notation).
struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};

// Remote protocol failure: timeout, non-2xx status, malformed response.
// The CLI maps these (and other runtime failures) to exit code 2.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace coalition
