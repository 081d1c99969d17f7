#pragma once

#include <stdexcept>
#include <string>

namespace pathfg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Config file could not be parsed or failed validation. `what()` names the field path.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pathfg
