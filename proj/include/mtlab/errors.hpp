#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtlab {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad sizes, ranges, or preconditions on caller-supplied values.
struct InvalidArgument : Error {
    using Error::Error;
};

// A field was paired with a mesh it does not belong to.
struct MeshMismatch : Error {
    using Error::Error;
};

// Poisson right-hand side with nonzero mean.
struct IncompatibleRhs : Error {
    using Error::Error;
};

// Weight function with (numerically) zero integral.
struct InvalidWeight : Error {
    using Error::Error;
};

// Least-squares stencil or annulus fit failed or is meaningless.
struct FitError : Error {
    using Error::Error;
};
struct ExpansionInvalid : Error {
    using Error::Error;
};

// A construction needs more room than the chart provides.
struct ScaleError : Error {
    using Error::Error;
};

// Degenerate input (e.g. constant field where a ratio needs a gradient).
struct DegenerateInput : Error {
    using Error::Error;
};

// Every candidate was excluded (e.g. all sample nodes sit in the zero set).
struct EmptyDomain : Error {
    using Error::Error;
};

// Iterative solver failed to converge.
struct NumericError : Error {
    using Error::Error;
};

// Expression text could not be parsed; offset is the byte position.
struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off) : Error(what), offset(off) {}
};

// Expression evaluated to a non-finite value somewhere.
struct EvalDomainError : Error {
    using Error::Error;
};

}  // namespace mtlab
