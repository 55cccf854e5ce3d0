#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochlog {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed coefficient expression. `position` is a 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Domain error while evaluating an expression (negative radicand, division by zero, overflow).
class EvalError : public Error {
public:
    EvalError(const std::string& what, double t)
        : Error(what + " at t=" + format_time(t)), time_(t) {}

    double time() const noexcept { return time_; }

    static std::string format_time(double t);

private:
    double time_;
};

/// A parameter or coefficient violated its contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Configuration file could not be parsed. `line` is 1-based, 0 when not applicable.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// State left the representable range during integration.
class BlowUpError : public Error {
public:
    explicit BlowUpError(double t)
        : Error("solution blew up at t=" + EvalError::format_time(t)), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace stochlog
