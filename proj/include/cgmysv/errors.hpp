#pragma once

#include <stdexcept>
#include <string>

namespace cgmysv {

/// Invalid parameters or inputs (CLI exit code 1).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: branch/domain problems, singular systems (exit code 2).
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// File read/write failure (exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace detail

}  // namespace cgmysv
