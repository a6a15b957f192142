#pragma once

#include <stdexcept>
#include <string>

namespace rph {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A vector expected to have unit norm does not.
struct NotUnitError : Error {
    using Error::Error;
};

/// A Gram matrix (or tuple) is rank deficient / not positive definite.
struct DegenerateError : Error {
    using Error::Error;
};

/// A zero vector was passed where a direction is required.
struct ZeroVectorError : Error {
    using Error::Error;
};

/// An argument lies outside the mathematical domain of the operation.
struct DomainError : Error {
    using Error::Error;
};

/// A quadrature routine could not reach the requested tolerance.
struct ToleranceError : Error {
    using Error::Error;
};

}  // namespace rph
