#pragma once

#include <stdexcept>
#include <string>

namespace quadlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter outside [1, 2] or another argument outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A phase derivative vanished where a quotient needs it.
class DegenerateDerivative : public Error {
public:
    using Error::Error;
};

/// Partition depth r that does not fit inside the critical window.
class RNotInPartition : public Error {
public:
    using Error::Error;
};

/// Interval handed to the classifier misses (-delta, delta).
class NotAReturn : public Error {
public:
    using Error::Error;
};

class NoReturnWithinBudget : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

class NoExpansionWithinBudget : public Error {
public:
    using Error::Error;
};

class BudgetExhausted : public Error {
public:
    using Error::Error;
};

class RateNotDefined : public Error {
public:
    using Error::Error;
};

class NotIncreasing : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration. `field()` is a JSON-pointer-like path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Missing or malformed fixture file.
class FixtureError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

template <typename E>
inline void check(bool ok, const std::string& msg) {
    if (!ok) {
        throw E(msg);
    }
}

}  // namespace detail

}  // namespace quadlab
