#pragma once

#include <stdexcept>
#include <string>

namespace fdc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed diagram or graph input.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Vector/scalar mismatch between operands.
class KindError : public Error {
public:
    using Error::Error;
};

// Vertex budget, contraction width, memory guard.
class BudgetError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// An internal invariant that the math guarantees was violated.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    NumericError(const std::string& what, int step) : Error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

}  // namespace fdc
