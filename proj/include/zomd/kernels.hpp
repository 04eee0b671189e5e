// SPDX-License-Identifier: Apache-2.0
//
// Kernels K on [-1, 1] for the two-point estimator. With r uniform on [-1, 1]
// a kernel of order l must satisfy
//
//   int r K(r) dr = 2,   int r^a K(r) dr = 0  for a = 0, 2, 3, ..., l
//
// so that E[r^a K(r)] picks out exactly the linear Taylor term.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace zomd::kernels {

class Kernel {
 public:
  Kernel(std::string name, std::size_t order, std::function<double(double)> fn);

  /// Polynomial kernel sum_k c_k r^k (ascending powers).
  static Kernel polynomial(std::string name, std::size_t order, std::vector<double> coefficients);

  double operator()(double r) const { return fn_(r); }
  std::size_t order() const noexcept { return order_; }
  const std::string& name() const noexcept { return name_; }
  /// Ascending power coefficients when the kernel is a polynomial.
  const std::optional<std::vector<double>>& coefficients() const noexcept { return coefficients_; }

 private:
  std::string name_;
  std::size_t order_;
  std::function<double(double)> fn_;
  std::optional<std::vector<double>> coefficients_;
};

/// K(r) = (15 r / 4)(5 - 7 r^2), order 3.
Kernel example_kernel();

/// Order-`ell` polynomial kernel sum_{k<=ell} (2k+1) P_k'(0) P_k(r) in the
/// Legendre basis. Only odd orders are accepted; ell = 3 reproduces
/// example_kernel().
Kernel legendre_kernel(std::size_t ell);

/// Resolve "example", "legendre:<ell>" or a comma-separated list of ascending
/// polynomial coefficients (order defaults to the polynomial degree).
Kernel from_spec(const std::string& spec, std::optional<std::size_t> order = std::nullopt);

struct Moment {
  std::size_t power;
  double value;
  double required;
};

struct MomentReport {
  std::vector<Moment> moments;  // powers 0..order
  double kappa = 0.0;           // int K^2
  double kappa_eps = 0.0;       // int |r|^eps |K|
  double eps = 0.0;
  double max_violation = 0.0;
  double tolerance = 1e-9;
  bool converged = true;
  double residual = 0.0;  // largest quadrature error estimate
  bool passed() const { return converged && max_violation <= tolerance; }
};

/// Certify the moment conditions of `k` by adaptive quadrature (absolute
/// tolerance 1e-10). Throws ParameterError for eps < 2.
MomentReport check_moments(const Kernel& k, double eps, double tolerance = 1e-9);

/// Human-readable table of a report.
std::string format_report(const Kernel& k, const MomentReport& report);

}  // namespace zomd::kernels
