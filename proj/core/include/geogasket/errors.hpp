#pragma once

#include <stdexcept>
#include <string>

namespace geogasket {

/// Precondition on an argument was violated (out-of-range ratio, empty input, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative solver stopped without reaching its target.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A geodesic left the chart domain while being integrated.
class EscapeError : public std::runtime_error {
public:
    EscapeError(const std::string& what, double exit_parameter)
        : std::runtime_error(what + " (exit parameter " + std::to_string(exit_parameter) + ")"),
          exit_parameter_(exit_parameter) {}

    double exit_parameter() const noexcept { return exit_parameter_; }

private:
    double exit_parameter_;
};

/// Side lengths do not form a proper triangle.
class DegenerateTriangleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Triangle construction or subdivision produced a cell that breaks a required property.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file or document could not be parsed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error(what + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Resource limit (atom budget, memory budget) exceeded.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace geogasket
