#pragma once

#include <stdexcept>
#include <string>

namespace fadcap {

/// Input outside the mathematical domain of an operation (non-finite values,
/// probabilities outside [0,1), negative gains, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive integration exhausted its subdivision budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double partial_value, double partial_error)
        : std::runtime_error(what), partial_value_(partial_value), partial_error_(partial_error) {}

    double partial_value() const noexcept { return partial_value_; }
    double partial_error() const noexcept { return partial_error_; }

private:
    double partial_value_;
    double partial_error_;
};

/// Root bracket endpoints have the same sign.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A multiplier solve failed (bracket expansion gave up, or a bracket that
/// must straddle the residual sign did not).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Result too large to represent (e.g. PAPR function far in the tail).
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Operation not applicable to these inputs (wrong distribution family,
/// constant PAPR routed to the variable-PAPR analysis, inactive peak cap).
class ScopeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Variable PAPR profile failed an admissibility screen.
class InadmissibleProfile : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed spec string or input file.
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace fadcap
