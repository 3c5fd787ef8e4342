#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

/// Base class for failures of a numerical routine (bad truncation, domain,
/// convergence). The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "numerical"; }
};

class ZeroNorm : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "zero_norm"; }
};

class TruncationInsufficient : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "truncation_insufficient"; }
};

class NonDecayingIntegrand : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "non_decaying_integrand"; }
};

class MaxDepthExceeded : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "max_depth_exceeded"; }
};

class InvalidCovariance : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "invalid_covariance"; }
};

/// Two independent evaluations of the same quantity disagree.
class CrossCheckFailed : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "cross_check_failed"; }
};

} // namespace optomech
