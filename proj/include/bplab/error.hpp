#pragma once

#include <stdexcept>
#include <string>

namespace bplab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

/// Raised when training produces a non-finite loss.
struct DivergenceError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

}  // namespace bplab
