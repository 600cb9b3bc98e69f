#pragma once

#include <stdexcept>
#include <string>

namespace ominlab {

// Base of every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on user-supplied data was violated (bad dimension, empty family, ...).
class invalid_input : public error {
public:
    using error::error;
};

// Exact exponent arithmetic left the range of 64-bit integers.
class exponent_overflow : public error {
public:
    using error::error;
};

// A quantity could not be certified from the available series terms.
class truncation_error : public error {
public:
    using error::error;
};

// Two independent criteria that must agree did not.
class consistency_error : public error {
public:
    using error::error;
};

// An iterative numerical routine (root isolation, quadrature) did not meet its tolerance.
class numerical_error : public error {
public:
    using error::error;
};

class syntax_error : public invalid_input {
public:
    syntax_error(const std::string& what, int line, int column)
        : invalid_input(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace ominlab
