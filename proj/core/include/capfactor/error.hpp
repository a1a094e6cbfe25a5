#pragma once

#include <stdexcept>
#include <string>

namespace capfactor {

/// Base for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, matrices, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular matrices, non-convergence, invalid parameters.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened or written.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace capfactor
