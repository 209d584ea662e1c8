#pragma once

#include <stdexcept>
#include <string>

namespace masterop {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite intermediate or failed numerical procedure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The defining integral cannot be truncated safely (no support, no horizon, no envelope).
class IntegrabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A family parameter constraint is violated (e.g. gamma <= s).
class ConstraintError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request outside what the implementation supports (e.g. Gauss-Hermite order > 200).
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed expression text; `column` is 1-based.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& msg, int column)
        : std::invalid_argument("column " + std::to_string(column) + ": " + msg), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

} // namespace masterop
