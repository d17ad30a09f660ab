#pragma once

#include <stdexcept>
#include <string>

namespace pwl {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix or vector dimensions do not satisfy a documented precondition.
struct DimensionMismatch : Error {
    using Error::Error;
};

// An operation that requires a purely linear system received affine terms.
struct AffineInput : Error {
    using Error::Error;
};

// A partition does not cover the expected index set exactly once.
struct InconsistentPartition : Error {
    using Error::Error;
};

// Not enough Markov coefficients to fill the requested Hankel block.
struct InsufficientOrder : Error {
    using Error::Error;
};

// The Hankel shift equation has no consistent solution at the chosen rank.
struct RankDeficientShift : Error {
    using Error::Error;
};

// No mode partition satisfying the requested (K, N) bounds exists.
struct KnPartitionNotFound : Error {
    using Error::Error;
};

// A scheduled entry state is not a member of the target mode's initial set.
struct InvalidEntryState : Error {
    using Error::Error;
};

// A simulated state left the representable range (overflow or NaN).
struct NonFiniteState : Error {
    using Error::Error;
};

// The identification routines need at least one sample.
struct EmptyDataset : Error {
    using Error::Error;
};

// Two sequences that must be compared elementwise have different lengths.
struct LengthMismatch : Error {
    using Error::Error;
};

// A residual check needs a switch-free segment but the data contains one.
struct SegmentContainsSwitch : Error {
    using Error::Error;
};

// A file or document could not be parsed into the expected schema.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace pwl
