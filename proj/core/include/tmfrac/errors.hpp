#pragma once

#include <stdexcept>
#include <string>

namespace tmfrac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model document or in-memory model violates an invariant.
class ModelError : public Error {
public:
    using Error::Error;
};

/// A node, outcome or materialization budget would be exceeded.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class NonBracketed : public Error {
public:
    using Error::Error;
};

class PreconditionUnmet : public Error {
public:
    using Error::Error;
};

/// The generating-function recursion hit 0/0 style ratio phi_1(z)/phi_0(z) with phi_0(z) = 0.
class DivisionByZero : public Error {
public:
    using Error::Error;
};

class WrongGeometry : public Error {
public:
    using Error::Error;
};

class WrongShape : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class AllExtinct : public Error {
public:
    using Error::Error;
};

class UndefinedNormalizer : public Error {
public:
    using Error::Error;
};

class MissingArtifact : public Error {
public:
    using Error::Error;
};

}  // namespace tmfrac
