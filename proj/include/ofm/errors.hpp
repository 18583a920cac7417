#pragma once

#include <stdexcept>
#include <string>

namespace ofm {

// Error taxonomy mirrors the CLI exit codes: parse (3), validation (4),
// numeric (5). Anything else that escapes is a plain ofm::error.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input bytes: bad log lines, bad spec files, bad report documents.
struct parse_error : error {
    using error::error;
};

// Structurally well-formed input that violates a contract (non-monotone steps,
// missing baseline, unit mismatch, grid outside the measured range, ...).
struct validation_error : error {
    using error::error;
};

// Non-finite values showing up where finite math was promised (diverged
// training, NaN metric values).
struct numeric_error : error {
    using error::error;
};

} // namespace ofm
