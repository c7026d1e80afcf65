#pragma once

#include <stdexcept>
#include <string>

namespace qdd {

/// Base class for all toolkit errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments or violated domain preconditions (non-positive magnitudes,
/// inverted ranges, unknown names). Maps to CLI exit code 2.
struct validation_error : error {
    using error::error;
};

/// A required motor field is missing and cannot be derived.
struct unresolved_field_error : validation_error {
    explicit unresolved_field_error(const std::string& symbol)
        : validation_error("unresolved field: " + symbol), field(symbol) {}
    std::string field;
};

/// Unreadable or malformed input files. Maps to CLI exit code 3.
struct io_error : error {
    using error::error;
};

/// Analysis cannot produce a result from otherwise well-formed data
/// (unidentifiable spectra, singular fits, swapped inertia runs).
/// Maps to CLI exit code 4.
struct analysis_error : error {
    using error::error;
};

}  // namespace qdd
