#pragma once

#include <stdexcept>
#include <string>

namespace qcs {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad parameters or configuration supplied by the caller.
class InvalidConfigError : public Error {
public:
    using Error::Error;
};

// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Malformed or truncated serialized data.
class CorruptPayloadError : public Error {
public:
    using Error::Error;
};

// Sensing-matrix generation exhausted its retry budget.
class GenerationFailureError : public Error {
public:
    using Error::Error;
};

// A linear system or factorization was numerically singular.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

// Division by a degenerate (zero) quantity.
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Correlation regularization produced a non-positive diagonal.
class RegularizationFailureError : public Error {
public:
    using Error::Error;
};

// Metric is undefined for the given input (zero signal, constant series).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Text input could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qcs
