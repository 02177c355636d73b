#pragma once

#include <stdexcept>
#include <string>

namespace ccf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
/// `parameter()` names the offending input so front ends can report it.
class ValidationError : public Error {
public:
    ValidationError(std::string parameter, const std::string& what)
        : Error(parameter + ": " + what), parameter_(std::move(parameter)) {}
    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// A computation ran but its numerical result cannot be trusted.
class NumericalError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public NumericalError {
public:
    CalibrationError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Field carries too much energy near the grid cutoff for the requested operation.
class UnderResolvedError : public NumericalError {
public:
    UnderResolvedError(const std::string& what, double tail_fraction)
        : NumericalError(what), tail_fraction_(tail_fraction) {}
    double tail_fraction() const noexcept { return tail_fraction_; }

private:
    double tail_fraction_;
};

/// Persisted data does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace ccf
