// SPDX-License-Identifier: Apache-2.0
//
// Shared vocabulary for the zomd library: vector alias, error hierarchy and
// a handful of small dense-vector helpers.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zomd {

using Vector = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter outside its admissible range (gamma <= 0, even kernel order, n < 2, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Point outside the domain of a mirror map or objective.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Clipping radius below 2G at some round.
class ScheduleViolation : public Error {
 public:
  ScheduleViolation(const std::string& what, std::size_t round) : Error(what), round_(round) {}
  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

/// NaN or infinity produced during a run.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative inner solve that did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace zomd
