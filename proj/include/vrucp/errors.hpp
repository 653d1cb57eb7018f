#ifndef VRUCP_ERRORS_HPP_
#define VRUCP_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vrucp {

// Root of every error raised by the library. The CLI maps UserError subclasses
// to exit code 2 and anything else to exit code 1.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UserError : public Error {
public:
  using Error::Error;
};

class InvalidInputError : public UserError {
public:
  using UserError::UserError;
};

// Point sets whose affine hull has dimension < 2.
class DegenerateInputError : public UserError {
public:
  using UserError::UserError;
};

class NumericalError : public Error {
public:
  NumericalError(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

private:
  std::size_t iterations_;
};

class SchemaError : public UserError {
public:
  using UserError::UserError;
};

class DataError : public UserError {
public:
  using UserError::UserError;
};

class ConfigError : public UserError {
public:
  using UserError::UserError;
};

}  // namespace vrucp

#endif  // VRUCP_ERRORS_HPP_
