#pragma once

#include <stdexcept>
#include <string>

namespace hgp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class UnsupportedKernel : public Error {
public:
    using Error::Error;
};

/// An input point falls outside (or on the boundary of) the basis domain.
class OutOfDomain : public Error {
public:
    OutOfDomain(long row, long dim, const std::string& what)
        : Error(what), row_(row), dim_(dim) {}

    [[nodiscard]] long row() const noexcept { return row_; }
    [[nodiscard]] long dim() const noexcept { return dim_; }

private:
    long row_;
    long dim_;
};

/// Cholesky failed even after the jitter ladder was exhausted.
class ConditioningError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class OptimizationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (CSV, config, model artifact).
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1, long column = -1)
        : Error(what), line_(line), column_(column) {}

    [[nodiscard]] long line() const noexcept { return line_; }
    [[nodiscard]] long column() const noexcept { return column_; }

private:
    long line_;
    long column_;
};

}  // namespace hgp
