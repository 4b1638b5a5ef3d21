#pragma once

#include <stdexcept>
#include <string>

namespace mmdf {

/// Malformed input document (syntax or schema shape).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed document that violates a model invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Balance equations of a mode admit only the zero solution.
class InconsistencyError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Precedence plus mapping admit no complete iteration.
class DeadlockError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Transition delay consumes the whole throughput budget of a mode.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mmdf
