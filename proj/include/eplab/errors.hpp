#pragma once

#include <stdexcept>
#include <string>

namespace eplab {

// Base for every numerical or domain failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// gamma_P + gamma_D == 0, so the field-free inversion is undefined.
class DegeneratePumpError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double d0)
        : Error(what), d0_(d0) {}
    double d0() const noexcept { return d0_; }

private:
    double d0_;
};

class StepUnderflowError : public Error {
public:
    StepUnderflowError(const std::string& what, double time)
        : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

class NoExceptionalPointError : public Error {
public:
    NoExceptionalPointError(const std::string& what, double lo, double hi)
        : Error(what), lo_(lo), hi_(hi) {}
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

// Density matrix left the physical set; signals a broken generator.
class PositivityError : public Error {
public:
    using Error::Error;
};

// Malformed command-line input (range specs, names, flag combinations).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace eplab
