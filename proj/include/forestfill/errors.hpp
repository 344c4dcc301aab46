#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forestfill {

/// Base of every error raised by the library. Each subclass names one
/// failure surface so callers (and the CLI exit-code mapping) can dispatch
/// on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class UnimputableColumn : public Error {
public:
    explicit UnimputableColumn(std::size_t col)
        : Error("column " + std::to_string(col) + " has no observed cells"), col_(col) {}
    std::size_t column() const noexcept { return col_; }

private:
    std::size_t col_;
};

class FactorizationFailure : public Error {
public:
    explicit FactorizationFailure(std::size_t pivot)
        : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
          pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class OobUnavailable : public Error {
public:
    using Error::Error;
};

class DegenerateDiff : public Error {
public:
    using Error::Error;
};

class ImputationFailure : public Error {
public:
    using Error::Error;
};

class AmputationFailure : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class SingularDesign : public Error {
public:
    using Error::Error;
};

class DegenerateNrmse : public Error {
public:
    using Error::Error;
};

class DegenerateCorrelation : public Error {
public:
    using Error::Error;
};

// Malformed CSV cell or config entry; carries a human-readable location.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace forestfill
