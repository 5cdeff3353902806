#pragma once

#include <stdexcept>
#include <string>

namespace hbs {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (range, shape).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration is inconsistent (q > n, unknown method, zero-trace term).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Input data could not be ingested (non-finite or non-numeric cells).
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, long row, long column)
      : Error(what), row_(row), column_(column) {}

  long row() const noexcept { return row_; }
  long column() const noexcept { return column_; }

 private:
  long row_;
  long column_;
};

/// The penalized normal equations could not be factorized even with jitter.
class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace hbs
