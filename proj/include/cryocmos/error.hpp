#pragma once

#include <stdexcept>
#include <string>

namespace cryo {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (non-positive
/// temperature, non-finite voltage, temperature outside a table, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Structured input that parses but violates its schema (unknown field,
/// wrong type, unsupported schema_version).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A matrix that had to be inverted was singular at `frequency()` Hz.
class SingularError : public Error {
public:
    SingularError(const std::string& what, double frequency_hz)
        : Error(what + " (singular at f = " + std::to_string(frequency_hz) + " Hz)"),
          frequency_(frequency_hz) {}
    double frequency() const noexcept { return frequency_; }

private:
    double frequency_;
};

}  // namespace cryo
