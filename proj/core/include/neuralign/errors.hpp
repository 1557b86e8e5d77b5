#pragma once

#include <stdexcept>
#include <string>

namespace neuralign {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (corpora, gold files, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or invocation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes that do not conform for an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A sentence has zero probability under the current model.
class ZeroProbabilityError : public DataError {
 public:
  using DataError::DataError;
};

// Emits a one-line warning on stderr.
void warn(const std::string& message);

}  // namespace neuralign
