// SPDX-License-Identifier: Apache-2.0
#include "zomd/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "zomd/common.hpp"

namespace zomd::quadrature {

GaussLegendre::GaussLegendre(std::size_t points) : nodes_(points), weights_(points) {
  if (points == 0) throw ParameterError("Gauss-Legendre rule needs at least one point");
  const std::size_t n = points;
  // Newton on P_n from the Chebyshev-like initial guess; roots are symmetric.
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = pk;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[n - 1 - i] = x;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

double GaussLegendre::integrate(const std::function<double(double)>& f, double a, double b) const {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) s += weights_[k] * f(mid + half * nodes_[k]);
  return half * s;
}

namespace {

struct Panel {
  double a, b, whole;
  std::size_t depth;
};

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, const AdaptiveOptions& options) {
  const GaussLegendre rule(options.points);
  Result res;
  const double width = b - a;
  if (width == 0.0) {
    res.converged = true;
    return res;
  }
  std::vector<Panel> todo{{a, b, rule.integrate(f, a, b), 0}};
  res.evaluations = options.points;
  res.converged = true;
  while (!todo.empty()) {
    Panel p = todo.back();
    todo.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double left = rule.integrate(f, p.a, m);
    const double right = rule.integrate(f, m, p.b);
    res.evaluations += 2 * options.points;
    const double diff = std::abs(left + right - p.whole);
    // tolerance share proportional to the panel width
    const double share = options.abs_tolerance * (p.b - p.a) / std::abs(width);
    if (diff <= share || p.depth >= options.max_depth || res.evaluations >= options.max_evaluations) {
      if (diff > share) res.converged = false;
      res.value += left + right;
      res.error_estimate += diff;
      continue;
    }
    todo.push_back({m, p.b, right, p.depth + 1});
    todo.push_back({p.a, m, left, p.depth + 1});
  }
  return res;
}

}  // namespace zomd::quadrature
