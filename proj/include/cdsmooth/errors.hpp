#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdsmooth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance could not be factorized even after the jitter schedule.
class DegenerateCovariance : public Error {
 public:
  explicit DegenerateCovariance(const std::string& what, std::ptrdiff_t node = -1)
      : Error(what), node_(node) {}

  /// Mesh node index where the failure happened, or -1 if not applicable.
  std::ptrdiff_t node() const noexcept { return node_; }

 private:
  std::ptrdiff_t node_;
};

/// The innovation covariance of a measurement update is not positive definite.
class DegenerateInnovation : public Error {
 public:
  using Error::Error;
};

/// A model callable or a numerical kernel produced a non-finite value.
class NumericalFault : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or inconsistent dimensions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace cdsmooth
