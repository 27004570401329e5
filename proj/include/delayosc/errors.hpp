#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace delayosc {

// Every module failure derives from Error so the CLI can report and exit
// nonzero without caring which layer raised it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    NonFiniteValue(double time, const std::string& what)
        : Error("non-finite value at t=" + std::to_string(time) + ": " + what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class NoOscillation : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t required, std::size_t allowed)
        : Error("memory budget exceeded: requires " + std::to_string(required) +
                " bytes, allowed " + std::to_string(allowed)),
          required_(required), allowed_(allowed) {}
    std::size_t required() const noexcept { return required_; }
    std::size_t allowed() const noexcept { return allowed_; }

private:
    std::size_t required_;
    std::size_t allowed_;
};

class ClosureDiverged : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error(field + ": " + message), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace delayosc
