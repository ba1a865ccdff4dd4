#pragma once

#include <stdexcept>
#include <string>

namespace hqmom {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument for a mathematical operation (e.g. R <= 0 with a
// fractional power).
struct DomainError : Error {
    using Error::Error;
};

// Moment set admits no nonnegative measure; carries the offending
// covariance discriminant.
struct NonRealizableError : Error {
    NonRealizableError(const std::string& what, double discriminant)
        : Error(what), discriminant(discriminant) {}
    double discriminant;
};

// Adaptive stepper could not meet its tolerance above the minimum step.
struct IntegrationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// File content does not match the expected schema (CSV header, JSON shape).
struct SchemaError : Error {
    using Error::Error;
};

// Model checkpoint is corrupt or has an unsupported version.
struct ModelFormatError : Error {
    using Error::Error;
};

struct ContractViolation : Error {
    using Error::Error;
};

}  // namespace hqmom
