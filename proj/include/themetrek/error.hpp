#pragma once

#include <stdexcept>
#include <string>

namespace themetrek {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Syntactically malformed input (bad row, bad token).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unknown identifier (item, user, theme, entity).
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace themetrek
