// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace zomd::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(std::size_t points);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Fixed-rule integral over [a, b].
  double integrate(const std::function<double(double)>& f, double a, double b) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;  // sum of |coarse - refined| over accepted panels
  bool converged = false;
  std::size_t evaluations = 0;
};

struct AdaptiveOptions {
  double abs_tolerance = 1e-10;
  std::size_t points = 20;
  std::size_t max_evaluations = 2'000'000;
  std::size_t max_depth = 60;
};

/// Adaptive composite Gauss-Legendre: a panel is accepted when the rule on the
/// whole panel and on its two halves agree to within the panel's share of the
/// tolerance; otherwise both halves are refined.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const AdaptiveOptions& options = {});

}  // namespace zomd::quadrature
