#pragma once

#include <stdexcept>
#include <string>

namespace pqoslat {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or contract violation (nonpositive rate, bad order, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Hypoexponential rates closer than the distinct-rates tolerance.
class DegenerateRatesError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Queue utilization at or above 1.
class InstabilityError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Numeric routine failed to converge (grid refinement, quantile bracket, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Too few samples for the requested statistic.
class SampleSizeError : public Error {
public:
    using Error::Error;
};

/// Malformed file or config: wrong header, unknown key, missing column.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Out-of-range or unparseable value; carries the offending row when known.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Training diverged or could not be set up.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace pqoslat
