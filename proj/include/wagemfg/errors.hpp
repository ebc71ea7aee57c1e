#pragma once

#include <stdexcept>
#include <string>

namespace wagemfg {

// Every failure raised by the library derives from Error; the category maps
// one-to-one onto the CLI exit codes.
enum class ErrorKind {
    Configuration,  // bad parameters, bad grid, bad config file
    NonConvergence, // iteration limits, oscillation
    LinearSolve,    // singular or degenerate systems
    Domain,         // argument outside the mathematical domain
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what)
        : Error(ErrorKind::Configuration, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what)
        : Error(ErrorKind::Domain, what) {}
};

class LinearSolveError : public Error {
public:
    explicit LinearSolveError(const std::string& what)
        : Error(ErrorKind::LinearSolve, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Raised when an iterative solver stops before meeting its tolerance.
/// Carries the last residual (or last change) so callers can report it.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, double last_residual, int iterations)
        : Error(ErrorKind::NonConvergence, what),
          last_residual_(last_residual),
          iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

} // namespace wagemfg
