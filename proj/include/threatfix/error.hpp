#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace threatfix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text: JSON, CSV, or a threat rule. Carries a 1-based
/// line/column when the source format has them (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Structurally valid input that violates the model schema or invariants.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Ill-sorted or non-closed threat formula.
class SortError : public Error {
public:
    using Error::Error;
};

/// Misuse of a solver or engine API (pop on empty stack, zero soft cost, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A configured resource bound was exceeded.
class LimitError : public Error {
public:
    using Error::Error;
};

}  // namespace threatfix
