#pragma once

#include <stdexcept>
#include <string>

namespace wavefuse {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Tensor, matrix or image extents do not agree.
class DimensionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Weights do not match the architecture they claim to describe.
class ModelError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Wavelet pyramid with inconsistent subband extents.
class StructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavefuse
