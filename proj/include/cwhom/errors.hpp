#pragma once

#include <stdexcept>
#include <string>

namespace cwhom {

/// Bad input: violated precondition, malformed file, out-of-range parameter.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The frequency grid is too coarse for the requested time scales.
class ResolutionError : public std::runtime_error {
 public:
  ResolutionError(const std::string& what, long required_n_points)
      : std::runtime_error(what), required_n_points_(required_n_points) {}

  long required_n_points() const noexcept { return required_n_points_; }

 private:
  long required_n_points_;
};

/// Transfer-matrix evaluation produced non-finite values.
class InvalidModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Visibility requested from a curve whose plateau cannot be trusted.
class UnreliablePlateauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cwhom
