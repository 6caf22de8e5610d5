#pragma once

#include <stdexcept>
#include <string>

namespace stp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data is missing, unreadable or semantically unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

// A persisted artifact (index bundle, model) is corrupt or of another version.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace stp
