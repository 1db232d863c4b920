#pragma once

#include <stdexcept>
#include <string>

namespace locnot {

/// Base class of all recoverable errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// Two waveforms do not share the same time grid.
struct GridMismatchError : ValidationError {
    using ValidationError::ValidationError;
};

/// Integration window does not overlap the waveform support.
struct EmptyWindowError : ValidationError {
    using ValidationError::ValidationError;
};

/// A delay would push non-negligible probability mass off the grid.
struct OutOfRangeError : ValidationError {
    using ValidationError::ValidationError;
};

/// Grid too coarse for the requested pulse shape.
struct ResolutionError : ValidationError {
    using ValidationError::ValidationError;
};

/// State with (numerically) zero norm cannot be normalized.
struct DegenerateStateError : ValidationError {
    using ValidationError::ValidationError;
};

/// Measurement schedule does not span the space of two-qubit observables.
struct RankDeficiencyError : ValidationError {
    using ValidationError::ValidationError;
};

} // namespace locnot
