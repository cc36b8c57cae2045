#pragma once

#include <stdexcept>
#include <string>

namespace wlearn {

/// Bad input: malformed literal, violated precondition, missing scenario field.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation not defined for the given distribution representation.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Base of failures raised by the numerics themselves (CLI exit code 2).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Probability mass outside a requested grid exceeds the tolerance.
class TailMassError : public NumericError {
public:
    using NumericError::NumericError;
};

/// p-th moment of a quantile integrand appears to diverge.
class MomentError : public NumericError {
public:
    using NumericError::NumericError;
};

/// KL(p||q) requested where p puts mass on a q-null set.
class AbsoluteContinuityError : public NumericError {
public:
    using NumericError::NumericError;
};

/// All posterior mass underflowed.
class DegenerateError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace wlearn
