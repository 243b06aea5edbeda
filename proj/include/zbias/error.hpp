#pragma once

#include <stdexcept>
#include <string>

namespace zbias {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A scenario or argument violates a documented constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A conditioning event has probability zero (f in {0,1}, zero ratio denominator).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A conditional mean such as E(Y|A=a,Z=z) is requested on an empty stratum.
class UndefinedStratumError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace zbias
