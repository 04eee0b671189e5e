// SPDX-License-Identifier: Apache-2.0
//
// Kernel-weighted two-point zeroth-order gradient estimate
//
//   g_l  = (f(x + gamma r e_l) - f(x - gamma r e_l)) / (2 gamma) + xi_l
//   ghat = K(r) g
//
// with one r ~ U[-1, 1] per agent-round, followed by norm clipping.
#pragma once

#include <cstddef>
#include <vector>

#include "zomd/common.hpp"
#include "zomd/kernels.hpp"
#include "zomd/problems.hpp"
#include "zomd/rng.hpp"

namespace zomd::estimator {

struct EstimateOptions {
  /// Draw an independent r for every coordinate instead of one shared r.
  bool per_coordinate_r = false;
};

struct Estimate {
  Vector raw;
  std::size_t oracle_calls = 0;  // always 2m
};

/// Raw kernel estimate of the gradient of f_i^t at x. Consumes r first, then
/// one noise draw per coordinate, in coordinate order.
Estimate zo_estimate(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t, std::span<const double> x,
                     double gamma, const kernels::Kernel& kernel, const problems::NoiseModel& noise, Stream& rng,
                     const EstimateOptions& options = {});

/// min{1, alpha / ||raw||} raw. The zero vector is returned unchanged.
Vector clip(std::span<const double> raw, double alpha);

struct EstimateRecord {
  Vector raw;
  Vector clipped;
  bool clip_active = false;
  std::size_t oracle_calls = 0;
};

EstimateRecord estimate_and_clip(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t,
                                 std::span<const double> x, double gamma, double alpha, const kernels::Kernel& kernel,
                                 const problems::NoiseModel& noise, Stream& rng, const EstimateOptions& options = {});

struct BiasRow {
  double gamma;
  Vector mean;
  Vector stderr_;  // per coordinate
  Vector true_gradient;
  /// ||mean - true_gradient||
  double bias_norm() const { return distance(mean, true_gradient); }
  double max_stderr() const;
};

/// Monte-Carlo mean and standard error of zo_estimate at (agent, t, point)
/// for each gamma, next to the analytic gradient. All gammas draw from the
/// same `rng`, in order.
std::vector<BiasRow> measure_bias(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t,
                                  std::span<const double> point, const std::vector<double>& gammas,
                                  const kernels::Kernel& kernel, const problems::NoiseModel& noise, std::size_t samples,
                                  Stream& rng, const EstimateOptions& options = {});

/// Least-squares slope of log|bias| against log gamma.
double log_log_slope(const std::vector<double>& gammas, const std::vector<double>& bias);

}  // namespace zomd::estimator
