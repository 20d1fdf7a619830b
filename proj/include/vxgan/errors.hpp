#pragma once

#include <stdexcept>
#include <string>

namespace vxgan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class NonScalarLoss : public Error {
 public:
  using Error::Error;
};

class GraphCycle : public Error {
 public:
  using Error::Error;
};

class MissingGradient : public Error {
 public:
  using Error::Error;
};

/// Data-level errors (bad volumes, bad files). The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class DegenerateVolume : public DataError {
 public:
  using DataError::DataError;
};

class VolumeTooSmall : public DataError {
 public:
  using DataError::DataError;
};

class IndexOutOfRange : public DataError {
 public:
  using DataError::DataError;
};

class CropTooLarge : public DataError {
 public:
  using DataError::DataError;
};

class InputTooSmall : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vxgan
