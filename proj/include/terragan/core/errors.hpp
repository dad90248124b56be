#pragma once

#include <stdexcept>
#include <string>

namespace terragan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Extent or channel mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
};

// Transient imagery failure; callers may retry.
class FetchError : public Error {
 public:
  using Error::Error;
};

class MissingFixtureError : public Error {
 public:
  using Error::Error;
};

}  // namespace terragan
