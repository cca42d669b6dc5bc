#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: out-of-range parameter, malformed config, missing file.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A requested geometry or configuration cannot exist.
class InfeasibleError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure: non-convergence, branch ambiguity, size limits.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a configured cap.
class SizeError : public NumericalError {
public:
    SizeError(const std::string& what, std::size_t dimension)
        : NumericalError(what), dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

}  // namespace plab
