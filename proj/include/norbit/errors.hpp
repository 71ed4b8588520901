#pragma once

#include <stdexcept>
#include <string>

namespace norbit {

struct DimensionMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested a generating function of a symplectic matrix with singular B block.
struct NotFreeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// det(S - I) is below tolerance; the Cayley transform / Weyl kernel is undefined.
struct SingularSMinusIError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index arithmetic hit a zero eigenvalue of P' + Q.
struct DegenerateIndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A trajectory left the representable range; carries the last valid time.
struct DivergedError : std::runtime_error {
    double last_valid_t;
    DivergedError(const std::string& what, double t)
        : std::runtime_error(what), last_valid_t(t) {}
};

/// Conditioning or resolution failure that must not be silently ignored.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BoundaryWrapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace norbit
