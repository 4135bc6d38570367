#pragma once

#include <stdexcept>
#include <string>

namespace b92 {

// Root of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

// Raised when a linearised model is pushed outside the regime where it holds.
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

class ProtocolDesyncError : public Error {
 public:
  using Error::Error;
};

class InsufficientKeyError : public Error {
 public:
  using Error::Error;
};

class PadDepletedError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace b92
