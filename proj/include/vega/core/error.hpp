#pragma once

#include <stdexcept>
#include <string>

namespace vega {

/// Bad input to an operation: failed precondition, shape mismatch, bad flag.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called on an object in the wrong mode (e.g. NAT call on an AT model).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A required file or artifact does not exist.
class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A token that no lexicon knows about.
class UnknownToken : public InvalidArgument {
 public:
  explicit UnknownToken(std::string token)
      : InvalidArgument("unknown token '" + token + "'"), token_(std::move(token)) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Non-finite value where a finite one is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vega
