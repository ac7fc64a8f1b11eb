#pragma once

#include <stdexcept>
#include <string>

namespace maschine {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, inconsistent schemas, vocabulary mismatches.
class DataError : public Error {
public:
  using Error::Error;
};

/// Non-finite losses or parameters during training.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Caller violated a documented precondition.
class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace maschine
