#ifndef NBSCREEN_ERRORS_HPP
#define NBSCREEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nbscreen {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, JSON, model file).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Model file with an unsupported version tag.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A well-formed token whose value is not acceptable (unknown class label,
/// missing cell, degenerate attribute).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied parameter outside its domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Contingency counts that disagree across attributes.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Attribute name not present in a schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Questionnaire response that does not fit its instrument.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input to a numerical kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbscreen

#endif  // NBSCREEN_ERRORS_HPP
