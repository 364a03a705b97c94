#pragma once

#include <stdexcept>
#include <string>

namespace spvs {

// Root of every error raised by the library. The CLI maps subclasses to exit
// codes: DataError/FormatError -> 1, ConfigError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Warnings go to stderr unless silenced (tests silence them).
void Warn(const std::string& message);
void SetWarningsEnabled(bool enabled);

}  // namespace spvs
