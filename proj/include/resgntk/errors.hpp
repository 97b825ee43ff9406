#pragma once

#include <stdexcept>
#include <string>

namespace resgntk {

// Base for everything the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IndexError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ConsistencyError : public Error { using Error::Error; };

// A 2x2 covariance that violates Cauchy-Schwarz beyond rounding tolerance.
class CovarianceError : public Error { using Error::Error; };

}  // namespace resgntk
