// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "zomd/common.hpp"
#include "zomd/rng.hpp"

namespace zomd::problems {

class ConstraintSet {
 public:
  enum class Kind { kBox, kBall, kSimplex };

  static ConstraintSet box(Vector lower, Vector upper);
  static ConstraintSet box(std::size_t m, double lower, double upper);
  static ConstraintSet ball(Vector center, double radius);
  /// Probability simplex {x >= 0, sum x = 1}.
  static ConstraintSet simplex(std::size_t m);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  const Vector& lower() const noexcept { return a_; }
  const Vector& upper() const noexcept { return b_; }
  const Vector& center() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }

  /// sup ||x - y|| over the set.
  double diameter() const;
  /// sup ||x|| over the set.
  double norm_bound() const;
  /// Euclidean projection.
  Vector project(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = 1e-12) const;

  /// Deterministic point number k of `count` spread across the set, used for
  /// initial states. k = 0 and k = count-1 sit on opposite sides.
  Vector spread_point(std::size_t k, std::size_t count) const;

 private:
  ConstraintSet(Kind kind, std::size_t dim, Vector a, Vector b, double radius)
      : kind_(kind), dim_(dim), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

  Kind kind_;
  std::size_t dim_;
  Vector a_;  // box lower bounds or ball center
  Vector b_;  // box upper bounds
  double radius_ = 0.0;
};

/// Sorting-based Euclidean projection onto {x >= 0, sum x = 1}.
Vector project_simplex(std::span<const double> x);

/// Additive oracle noise xi. Its mean need not be zero.
class NoiseModel {
 public:
  enum class Kind { kNone, kConstantBias, kGaussian, kFDistribution, kCustom };
  using Sampler = std::function<double(Stream&)>;

  static NoiseModel none();
  static NoiseModel constant_bias(double c);
  static NoiseModel gaussian(double mean, double stddev);
  static NoiseModel f_distribution(double d1, double d2);
  /// `sigma_bound` must bound sqrt(E[xi^2]).
  static NoiseModel custom(std::string name, Sampler sampler, double sigma_bound);
  /// "none", "constant:<c>", "gaussian:<mean>:<stddev>" or "f:<d1>:<d2>".
  static NoiseModel from_spec(const std::string& spec);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& parameters() const noexcept { return params_; }
  /// sigma with E[xi^2] <= sigma^2.
  double sigma_bound() const noexcept { return sigma_; }
  /// Exact mean when known.
  std::optional<double> mean() const;
  std::optional<double> variance() const;

  double sample(Stream& rng) const;

 private:
  NoiseModel(Kind kind, std::string name, std::vector<double> params, double sigma, Sampler sampler = {})
      : kind_(kind), name_(std::move(name)), params_(std::move(params)), sigma_(sigma), sampler_(std::move(sampler)) {}

  Kind kind_;
  std::string name_;
  std::vector<double> params_;
  double sigma_;
  Sampler sampler_;
};

/// Problem constants: gradient bound G, value bound D, Holder pair (H, eps)
/// and gradient Lipschitz constant L0 over the constraint set.
struct Bounds {
  double G = 0.0;
  double D = 0.0;
  double H = 0.0;
  double eps = 2.0;
  double L0 = 0.0;
};

/// Online objectives f_i^t over a constraint set, agents 0..n-1 and rounds
/// 1..T. Objectives must be defined on all of R^m, since the estimator
/// queries points slightly outside the set.
class OnlineProblem {
 public:
  OnlineProblem(std::size_t agents, std::size_t dimension, std::size_t horizon, ConstraintSet constraint,
                Bounds bounds);
  virtual ~OnlineProblem() = default;

  std::size_t agents() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return m_; }
  std::size_t horizon() const noexcept { return T_; }
  const ConstraintSet& constraint() const noexcept { return constraint_; }
  const Bounds& bounds() const noexcept { return bounds_; }
  void set_gradient_bound(double G) { bounds_.G = G; }

  virtual double objective(std::size_t i, std::size_t t, std::span<const double> x) const = 0;
  virtual std::optional<Vector> gradient(std::size_t i, std::size_t t, std::span<const double> x) const;

  /// f^t(x) = (1/n) sum_i f_i^t(x).
  double global_objective(std::size_t t, std::span<const double> x) const;
  std::optional<Vector> global_gradient(std::size_t t, std::span<const double> x) const;

  /// argmin over the constraint set of f^t. The default runs a projected
  /// gradient solve and throws ConvergenceError when it does not converge.
  virtual Vector minimizer(std::size_t t) const;

 protected:
  void check_round(std::size_t t) const;

 private:
  std::size_t n_, m_, T_;
  ConstraintSet constraint_;
  Bounds bounds_;
};

using ProblemPtr = std::shared_ptr<const OnlineProblem>;

/// Problem assembled from callables; handy for tests and synthetic studies.
class FunctionProblem final : public OnlineProblem {
 public:
  using Objective = std::function<double(std::size_t, std::size_t, std::span<const double>)>;
  using Gradient = std::function<Vector(std::size_t, std::size_t, std::span<const double>)>;

  FunctionProblem(std::size_t agents, std::size_t dimension, std::size_t horizon, ConstraintSet constraint,
                  Bounds bounds, Objective objective, Gradient gradient = {});

  double objective(std::size_t i, std::size_t t, std::span<const double> x) const override;
  std::optional<Vector> gradient(std::size_t i, std::size_t t, std::span<const double> x) const override;

 private:
  Objective objective_;
  Gradient gradient_;
};

/// f_i^t(x) = 1/2 ||y_i(t) - M_i x||^2 with scalar gains M_i and frozen
/// measurements y_i(t) = M_i z(t) + e_i(t).
class LeastSquaresProblem final : public OnlineProblem {
 public:
  /// `target[t-1]` is z(t); `noise[t-1][i]` is e_i(t) (one value per coordinate).
  LeastSquaresProblem(std::vector<double> gains, std::vector<Vector> target, std::vector<std::vector<Vector>> noise,
                      ConstraintSet constraint);

  double objective(std::size_t i, std::size_t t, std::span<const double> x) const override;
  std::optional<Vector> gradient(std::size_t i, std::size_t t, std::span<const double> x) const override;
  /// Closed form: project (sum_i M_i y_i) / (sum_i M_i^2).
  Vector minimizer(std::size_t t) const override;

  const std::vector<double>& gains() const noexcept { return gains_; }
  const Vector& target(std::size_t t) const { return target_.at(t - 1); }
  const Vector& measurement(std::size_t i, std::size_t t) const { return y_.at(t - 1).at(i); }
  const Vector& noise(std::size_t i, std::size_t t) const { return e_.at(t - 1).at(i); }

  /// Frozen realizations as CSV: t, agent, e, y, z (one row per coordinate
  /// block; for m > 1 the columns are suffixed _1.._m).
  void write_noise_csv(std::ostream& os) const;

 private:
  std::vector<double> gains_;
  std::vector<Vector> target_;
  std::vector<std::vector<Vector>> e_;
  std::vector<std::vector<Vector>> y_;
  double gain_sq_sum_ = 0.0;
};

struct SensorNetworkOptions {
  std::vector<double> gains{0.5, 0.1, 2.0, 1.0, 1.2, 1.8};
  double z0 = 0.0;
  double radius = 5.0;  // constraint |x| <= radius
  NoiseModel noise = NoiseModel::f_distribution(3.0, 5.0);
};

/// z(t) = 0.2 z(t-1) + 0.5 cos(t/60) + 0.5 for t = 1..T.
std::vector<double> target_trajectory(std::size_t horizon, double z0);

/// Six-sensor moving-target tracking instance (m = 1, Omega = [-5, 5]).
/// Measurement noise is drawn once from `seed` and frozen.
std::shared_ptr<LeastSquaresProblem> sensor_network_problem(std::uint64_t seed, std::size_t horizon,
                                                            const SensorNetworkOptions& options = {});

/// Static target observed by every agent with noise: y_i(t) = M_i target + e_i(t).
std::shared_ptr<LeastSquaresProblem> static_least_squares_problem(std::uint64_t seed, std::size_t horizon,
                                                                  std::vector<double> gains, Vector target,
                                                                  ConstraintSet constraint, const NoiseModel& noise);

struct MinimizerTrace {
  std::vector<Vector> points;  // x*(1..T)
  double variation = 0.0;
};

/// sum_{t=1}^{T} ||x*(t+1) - x*(t)|| with x*(T+1) = x*(T).
double path_variation(const std::vector<Vector>& points);

MinimizerTrace minimizer_trace(const OnlineProblem& problem);

struct InnerSolveOptions {
  double tolerance = 1e-10;  // gradient-mapping norm
  std::size_t max_iterations = 200'000;
};

/// Projected gradient with backtracking on f^t; throws ConvergenceError when
/// the gradient mapping stays above tolerance.
Vector projected_gradient_minimizer(const OnlineProblem& problem, std::size_t t, const InnerSolveOptions& options = {});

}  // namespace zomd::problems
