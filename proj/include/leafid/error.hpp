#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace leafid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot be used (unreadable file, empty input, degenerate shape).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A feature could not be computed because one of its denominators vanished.
class FeatureError : public DataError {
 public:
  FeatureError(std::string feature, const std::string& message)
      : DataError(feature + ": " + message), feature_(std::move(feature)) {}

  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

/// A serialized document does not match the expected layout.
/// `path()` is a JSON pointer to the offending field.
class SchemaError : public DataError {
 public:
  SchemaError(std::string path, const std::string& message)
      : DataError((path.empty() ? std::string("/") : path) + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace leafid
