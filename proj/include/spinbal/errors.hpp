#pragma once

#include <stdexcept>
#include <string>

namespace spinbal {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration or argument value is outside its admissible range.
/// `field()` names the offending input.
class InvalidArgument : public Error {
public:
    InvalidArgument(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Plane offsets a + b collapse to zero; the force/moment split is undefined.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// A numerical estimate (Lojasiewicz constants, horizon bound, ...) could not be formed.
class EstimationFailure : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace spinbal
