#pragma once

#include <stdexcept>
#include <string>

namespace gprace {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or missing configuration value. Message carries "section.key".
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operation requires |vx| above the low-speed threshold.
class LowSpeedError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or failed numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Cholesky factorization failed even after jitter escalation.
class FactorizationError : public NumericError {
public:
    using Error::Error;
};

/// Single-step mismatch is nonzero on state components that must stay clean.
class SparsityError : public Error {
public:
    using Error::Error;
};

/// Random generation could not satisfy its constraints within the retry budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// A referenced file or pipeline stage output does not exist.
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

} // namespace gprace
