#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csync {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (bad network, non-equitable
/// partition, infeasible generator spec, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A numerical invariant that should hold by construction did not
/// (identity missing from the commutant, constant direction not found, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace csync
