#pragma once

#include <stdexcept>
#include <string>

namespace nlpt {

/// Error classes map one-to-one onto CLI exit codes.
enum class ErrorKind {
    Config = 2,
    NonConvergence = 3,
    Divergence = 4,
    Validation = 5,
    Numerical = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& what) : Error(ErrorKind::NonConvergence, what) {}
};

class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorKind::Divergence, what) {}
};

}  // namespace nlpt
