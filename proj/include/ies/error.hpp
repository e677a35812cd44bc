#pragma once

#include <stdexcept>
#include <string>

namespace ies {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Argument outside the mathematical domain of a model (e.g. recovery rate >= 1).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

/// Caller broke a precondition (negative flow, dimension mismatch, ...).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error("contract_violation", what) {}
};

/// A setpoint lies outside a device operating limit.
class LimitViolation : public Error {
public:
    LimitViolation(std::string bound, const std::string& what)
        : Error("limit_violation", what), bound_(std::move(bound)) {}

    /// Name of the violated bound, e.g. "chp.p_min".
    const std::string& bound() const noexcept { return bound_; }

private:
    std::string bound_;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : Error("parse_error", locate(what, row, column)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string locate(const std::string& what, std::size_t row, std::size_t column) {
        if (row == 0) return what;
        std::string loc = "row " + std::to_string(row);
        if (column != 0) loc += ", column " + std::to_string(column);
        return loc + ": " + what;
    }

    std::size_t row_;
    std::size_t column_;
};

/// Well-formed input that does not match the expected schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema_error", what) {}
};

/// Checkpoint / configuration mismatch detected before evaluation.
class MismatchError : public Error {
public:
    explicit MismatchError(const std::string& what) : Error("mismatch_error", what) {}
};

/// Training aborted by the divergence detector.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

}  // namespace ies
