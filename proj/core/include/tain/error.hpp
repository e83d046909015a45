#pragma once

#include <stdexcept>
#include <string>

namespace tain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes are inconsistent with an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, training or augmentation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the autograd graph (double backward, non-scalar loss, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-system, image or checkpoint I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tain
