#pragma once

#include <stdexcept>
#include <string>

namespace nnlif {

// Input or configuration problems. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failures detected while computing. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RegimeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfLifespanError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericalIntegrityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvariantError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class HorizonError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace nnlif
