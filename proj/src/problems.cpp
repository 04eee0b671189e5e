// SPDX-License-Identifier: Apache-2.0
#include "zomd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/core.h>

namespace zomd::problems {

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet ConstraintSet::box(Vector lower, Vector upper) {
  if (lower.empty() || lower.size() != upper.size()) throw ParameterError("box bounds must be non-empty and equal length");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] <= upper[k])) throw ParameterError(fmt::format("box coordinate {} has lower > upper", k));
  }
  const std::size_t m = lower.size();
  return ConstraintSet(Kind::kBox, m, std::move(lower), std::move(upper), 0.0);
}

ConstraintSet ConstraintSet::box(std::size_t m, double lower, double upper) {
  return box(Vector(m, lower), Vector(m, upper));
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
  if (center.empty()) throw ParameterError("ball center must be non-empty");
  if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
  const std::size_t m = center.size();
  return ConstraintSet(Kind::kBall, m, std::move(center), {}, radius);
}

ConstraintSet ConstraintSet::simplex(std::size_t m) {
  if (m == 0) throw ParameterError("simplex dimension must be positive");
  return ConstraintSet(Kind::kSimplex, m, {}, {}, 0.0);
}

double ConstraintSet::diameter() const {
  switch (kind_) {
    case Kind::kBox:
      return distance(a_, b_);
    case Kind::kBall:
      return 2.0 * radius_;
    case Kind::kSimplex:
      return dim_ == 1 ? 0.0 : std::sqrt(2.0);
  }
  return 0.0;
}

double ConstraintSet::norm_bound() const {
  switch (kind_) {
    case Kind::kBox: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double v = std::max(std::abs(a_[k]), std::abs(b_[k]));
        s += v * v;
      }
      return std::sqrt(s);
    }
    case Kind::kBall:
      return norm(a_) + radius_;
    case Kind::kSimplex:
      return 1.0;
  }
  return 0.0;
}

Vector project_simplex(std::span<const double> x) {
  Vector u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::max(x[k] - theta, 0.0);
  return out;
}

Vector ConstraintSet::project(std::span<const double> x) const {
  if (x.size() != dim_) throw ParameterError(fmt::format("project: expected dimension {}, got {}", dim_, x.size()));
  switch (kind_) {
    case Kind::kBox: {
      Vector out(dim_);
      for (std::size_t k = 0; k < dim_; ++k) out[k] = std::clamp(x[k], a_[k], b_[k]);
      return out;
    }
    case Kind::kBall: {
      const double d = distance(x, a_);
      if (d <= radius_) return Vector(x.begin(), x.end());
      Vector out(dim_);
      const double s = radius_ / d;
      for (std::size_t k = 0; k < dim_; ++k) out[k] = a_[k] + s * (x[k] - a_[k]);
      return out;
    }
    case Kind::kSimplex:
      return project_simplex(x);
  }
  return {};
}

bool ConstraintSet::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim_) return false;
  switch (kind_) {
    case Kind::kBox:
      for (std::size_t k = 0; k < dim_; ++k) {
        if (x[k] < a_[k] - tol || x[k] > b_[k] + tol) return false;
      }
      return true;
    case Kind::kBall:
      return distance(x, a_) <= radius_ + tol;
    case Kind::kSimplex: {
      double s = 0.0;
      for (double v : x) {
        if (v < -tol) return false;
        s += v;
      }
      return std::abs(s - 1.0) <= tol * static_cast<double>(dim_);
    }
  }
  return false;
}

Vector ConstraintSet::spread_point(std::size_t k, std::size_t count) const {
  const double frac = count <= 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(count - 1);
  switch (kind_) {
    case Kind::kBox: {
      Vector out(dim_);
      for (std::size_t j = 0; j < dim_; ++j) out[j] = a_[j] + frac * (b_[j] - a_[j]);
      return out;
    }
    case Kind::kBall: {
      Vector out(a_);
      const double step = radius_ * (2.0 * frac - 1.0) / std::sqrt(static_cast<double>(dim_));
      for (double& v : out) v += step;
      return out;
    }
    case Kind::kSimplex: {
      // interior point leaning towards vertex k mod m
      Vector out(dim_, 0.1 / static_cast<double>(dim_));
      out[k % dim_] += 0.9;
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel NoiseModel::none() { return NoiseModel(Kind::kNone, "none", {}, 0.0); }

NoiseModel NoiseModel::constant_bias(double c) { return NoiseModel(Kind::kConstantBias, "constant", {c}, std::abs(c)); }

NoiseModel NoiseModel::gaussian(double mean, double stddev) {
  if (!(stddev >= 0.0)) throw ParameterError("gaussian noise stddev must be nonnegative");
  return NoiseModel(Kind::kGaussian, "gaussian", {mean, stddev}, std::sqrt(mean * mean + stddev * stddev));
}

NoiseModel NoiseModel::f_distribution(double d1, double d2) {
  if (!(d1 > 0.0)) throw ParameterError("F-distribution d1 must be positive");
  // a finite second moment needs d2 > 4
  if (!(d2 > 4.0)) throw ParameterError(fmt::format("F-distribution needs d2 > 4 for bounded variance, got {}", d2));
  const double mean = d2 / (d2 - 2.0);
  const double var = 2.0 * d2 * d2 * (d1 + d2 - 2.0) / (d1 * (d2 - 2.0) * (d2 - 2.0) * (d2 - 4.0));
  return NoiseModel(Kind::kFDistribution, "f", {d1, d2}, std::sqrt(var + mean * mean));
}

NoiseModel NoiseModel::custom(std::string name, Sampler sampler, double sigma_bound) {
  if (!sampler) throw ParameterError("custom noise needs a sampler");
  return NoiseModel(Kind::kCustom, std::move(name), {}, sigma_bound, std::move(sampler));
}

NoiseModel NoiseModel::from_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  std::vector<double> v;
  try {
    for (std::size_t k = 1; k < parts.size(); ++k) v.push_back(std::stod(parts[k]));
  } catch (const std::exception&) {
    throw ParameterError(fmt::format("noise spec '{}' has a non-numeric parameter", spec));
  }
  const auto& kind = parts.front();
  if (kind == "none" && v.empty()) return none();
  if (kind == "constant" && v.size() == 1) return constant_bias(v[0]);
  if (kind == "gaussian" && v.size() == 2) return gaussian(v[0], v[1]);
  if (kind == "f" && v.size() == 2) return f_distribution(v[0], v[1]);
  throw ParameterError(fmt::format("noise spec '{}' not understood (none, constant:c, gaussian:mean:sd, f:d1:d2)", spec));
}

std::optional<double> NoiseModel::mean() const {
  switch (kind_) {
    case Kind::kNone:
      return 0.0;
    case Kind::kConstantBias:
    case Kind::kGaussian:
      return params_[0];
    case Kind::kFDistribution:
      return params_[1] / (params_[1] - 2.0);
    case Kind::kCustom:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> NoiseModel::variance() const {
  switch (kind_) {
    case Kind::kNone:
    case Kind::kConstantBias:
      return 0.0;
    case Kind::kGaussian:
      return params_[1] * params_[1];
    case Kind::kFDistribution: {
      const double d1 = params_[0], d2 = params_[1];
      return 2.0 * d2 * d2 * (d1 + d2 - 2.0) / (d1 * (d2 - 2.0) * (d2 - 2.0) * (d2 - 4.0));
    }
    case Kind::kCustom:
      return std::nullopt;
  }
  return std::nullopt;
}

double NoiseModel::sample(Stream& rng) const {
  switch (kind_) {
    case Kind::kNone:
      return 0.0;
    case Kind::kConstantBias:
      return params_[0];
    case Kind::kGaussian:
      return std::normal_distribution<double>(params_[0], params_[1])(rng);
    case Kind::kFDistribution: {
      // ratio of scaled chi-squares
      const double d1 = params_[0], d2 = params_[1];
      const double u = std::chi_squared_distribution<double>(d1)(rng);
      const double v = std::chi_squared_distribution<double>(d2)(rng);
      return (u / d1) / (v / d2);
    }
    case Kind::kCustom:
      return sampler_(rng);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// OnlineProblem

OnlineProblem::OnlineProblem(std::size_t agents, std::size_t dimension, std::size_t horizon, ConstraintSet constraint,
                             Bounds bounds)
    : n_(agents), m_(dimension), T_(horizon), constraint_(std::move(constraint)), bounds_(bounds) {
  if (n_ == 0) throw ParameterError("problem needs at least one agent");
  if (T_ == 0) throw ParameterError("problem horizon must be positive");
  if (constraint_.dimension() != m_) {
    throw ParameterError(fmt::format("constraint dimension {} does not match problem dimension {}",
                                     constraint_.dimension(), m_));
  }
}

std::optional<Vector> OnlineProblem::gradient(std::size_t, std::size_t, std::span<const double>) const {
  return std::nullopt;
}

void OnlineProblem::check_round(std::size_t t) const {
  if (t == 0 || t > T_) throw ParameterError(fmt::format("round {} outside [1, {}]", t, T_));
}

double OnlineProblem::global_objective(std::size_t t, std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += objective(i, t, x);
  return s / static_cast<double>(n_);
}

std::optional<Vector> OnlineProblem::global_gradient(std::size_t t, std::span<const double> x) const {
  Vector g(m_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    auto gi = gradient(i, t, x);
    if (!gi) return std::nullopt;
    for (std::size_t k = 0; k < m_; ++k) g[k] += (*gi)[k];
  }
  for (double& v : g) v /= static_cast<double>(n_);
  return g;
}

Vector OnlineProblem::minimizer(std::size_t t) const { return projected_gradient_minimizer(*this, t); }

Vector projected_gradient_minimizer(const OnlineProblem& problem, std::size_t t, const InnerSolveOptions& options) {
  const auto& omega = problem.constraint();
  Vector x = omega.project(omega.spread_point(0, 1));
  double step = problem.bounds().L0 > 0.0 ? 1.0 / problem.bounds().L0 : 1.0;
  double mapping = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const auto g = problem.global_gradient(t, x);
    if (!g) throw ConvergenceError("minimizer: inner solve needs analytic gradients");
    const double fx = problem.global_objective(t, x);
    Vector trial(x.size()), next;
    // backtrack until the quadratic upper model holds
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] - step * (*g)[k];
      next = omega.project(trial);
      Vector d(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) d[k] = next[k] - x[k];
      const double model = fx + dot(*g, d) + dot(d, d) / (2.0 * step);
      if (problem.global_objective(t, next) <= model + 1e-15 * std::max(1.0, std::abs(fx))) break;
      step *= 0.5;
    }
    mapping = distance(next, x) / step;
    x = std::move(next);
    if (mapping <= options.tolerance) return x;
    step *= 1.25;
  }
  throw ConvergenceError(fmt::format("minimizer at round {}: gradient mapping {:.3e} above {:.1e} after {} iterations", t,
                                     mapping, options.tolerance, options.max_iterations));
}

// ---------------------------------------------------------------------------
// FunctionProblem

FunctionProblem::FunctionProblem(std::size_t agents, std::size_t dimension, std::size_t horizon,
                                 ConstraintSet constraint, Bounds bounds, Objective objective, Gradient gradient)
    : OnlineProblem(agents, dimension, horizon, std::move(constraint), bounds),
      objective_(std::move(objective)),
      gradient_(std::move(gradient)) {
  if (!objective_) throw ParameterError("FunctionProblem needs an objective");
}

double FunctionProblem::objective(std::size_t i, std::size_t t, std::span<const double> x) const {
  check_round(t);
  if (i >= agents()) throw ParameterError(fmt::format("agent {} outside [0, {})", i, agents()));
  return objective_(i, t, x);
}

std::optional<Vector> FunctionProblem::gradient(std::size_t i, std::size_t t, std::span<const double> x) const {
  if (!gradient_) return std::nullopt;
  check_round(t);
  if (i >= agents()) throw ParameterError(fmt::format("agent {} outside [0, {})", i, agents()));
  return gradient_(i, t, x);
}

// ---------------------------------------------------------------------------
// LeastSquaresProblem

namespace {

Bounds least_squares_bounds(const std::vector<double>& gains, const std::vector<std::vector<Vector>>& y,
                            const ConstraintSet& omega) {
  double max_gain = 0.0;
  for (double g : gains) max_gain = std::max(max_gain, std::abs(g));
  double y_cap = 0.0;
  for (const auto& round : y) {
    for (const auto& yi : round) y_cap = std::max(y_cap, norm(yi));
  }
  const double r = omega.norm_bound();
  Bounds b;
  b.G = max_gain * (r * max_gain + y_cap);
  b.D = 0.5 * (y_cap + max_gain * r) * (y_cap + max_gain * r);
  // quadratics: the order-2 Taylor expansion is exact
  b.H = 0.0;
  b.eps = 3.0;
  b.L0 = max_gain * max_gain;
  return b;
}

std::vector<std::vector<Vector>> measurements(const std::vector<double>& gains, const std::vector<Vector>& target,
                                              const std::vector<std::vector<Vector>>& noise) {
  std::vector<std::vector<Vector>> y(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (noise.at(t).size() != gains.size()) throw ParameterError("noise table has the wrong agent count");
    y[t].resize(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i) {
      const auto& e = noise[t][i];
      if (e.size() != target[t].size()) throw ParameterError("noise table has the wrong dimension");
      y[t][i].resize(e.size());
      for (std::size_t k = 0; k < e.size(); ++k) y[t][i][k] = gains[i] * target[t][k] + e[k];
    }
  }
  return y;
}

}  // namespace

LeastSquaresProblem::LeastSquaresProblem(std::vector<double> gains, std::vector<Vector> target,
                                         std::vector<std::vector<Vector>> noise, ConstraintSet constraint)
    : OnlineProblem(gains.size(), constraint.dimension(), target.size(), constraint,
                    least_squares_bounds(gains, measurements(gains, target, noise), constraint)),
      gains_(std::move(gains)),
      target_(std::move(target)),
      e_(std::move(noise)) {
  y_ = measurements(gains_, target_, e_);
  for (double g : gains_) gain_sq_sum_ += g * g;
  if (!(gain_sq_sum_ > 0.0)) throw ParameterError("least-squares gains must not all be zero");
}

double LeastSquaresProblem::objective(std::size_t i, std::size_t t, std::span<const double> x) const {
  const auto& y = y_[t - 1][i];
  const double g = gains_[i];
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - g * x[k];
    s += r * r;
  }
  return 0.5 * s;
}

std::optional<Vector> LeastSquaresProblem::gradient(std::size_t i, std::size_t t, std::span<const double> x) const {
  const auto& y = y_[t - 1][i];
  const double g = gains_[i];
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = g * (g * x[k] - y[k]);
  return out;
}

Vector LeastSquaresProblem::minimizer(std::size_t t) const {
  check_round(t);
  // sum_i f_i is isotropic around the weighted mean, so projecting it is exact
  Vector xhat(dimension(), 0.0);
  for (std::size_t i = 0; i < agents(); ++i) {
    for (std::size_t k = 0; k < dimension(); ++k) xhat[k] += gains_[i] * y_[t - 1][i][k];
  }
  for (double& v : xhat) v /= gain_sq_sum_;
  return constraint().project(xhat);
}

void LeastSquaresProblem::write_noise_csv(std::ostream& os) const {
  const std::size_t m = dimension();
  auto cols = [&](const char* base) {
    if (m == 1) return std::string(base);
    std::string s;
    for (std::size_t k = 1; k <= m; ++k) s += fmt::format("{}{}_{}", k == 1 ? "" : ",", base, k);
    return s;
  };
  os << "t,agent," << cols("e") << ',' << cols("y") << ',' << cols("z") << '\n';
  auto emit = [&](const Vector& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += fmt::format("{}{:.17g}", k == 0 ? "" : ",", v[k]);
    return s;
  };
  for (std::size_t t = 1; t <= horizon(); ++t) {
    for (std::size_t i = 0; i < agents(); ++i) {
      os << t << ',' << (i + 1) << ',' << emit(e_[t - 1][i]) << ',' << emit(y_[t - 1][i]) << ','
         << emit(target_[t - 1]) << '\n';
    }
  }
}

std::vector<double> target_trajectory(std::size_t horizon, double z0) {
  std::vector<double> z(horizon);
  double prev = z0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    prev = 0.2 * prev + 0.5 * std::cos(static_cast<double>(t) / 60.0) + 0.5;
    z[t - 1] = prev;
  }
  return z;
}

namespace {

std::vector<std::vector<Vector>> draw_noise(std::uint64_t seed, std::size_t horizon, std::size_t agents,
                                            std::size_t m, const NoiseModel& noise) {
  std::vector<std::vector<Vector>> e(horizon, std::vector<Vector>(agents, Vector(m, 0.0)));
  for (std::size_t t = 1; t <= horizon; ++t) {
    for (std::size_t i = 0; i < agents; ++i) {
      Stream rng(seed, i, t, StreamPurpose::kMeasurementNoise);
      for (std::size_t k = 0; k < m; ++k) e[t - 1][i][k] = noise.sample(rng);
    }
  }
  return e;
}

}  // namespace

std::shared_ptr<LeastSquaresProblem> sensor_network_problem(std::uint64_t seed, std::size_t horizon,
                                                            const SensorNetworkOptions& options) {
  if (horizon == 0) throw ParameterError("sensor network horizon must be positive");
  const auto z = target_trajectory(horizon, options.z0);
  std::vector<Vector> target(horizon);
  for (std::size_t t = 0; t < horizon; ++t) target[t] = {z[t]};
  auto e = draw_noise(seed, horizon, options.gains.size(), 1, options.noise);
  return std::make_shared<LeastSquaresProblem>(options.gains, std::move(target), std::move(e),
                                               ConstraintSet::box(1, -options.radius, options.radius));
}

std::shared_ptr<LeastSquaresProblem> static_least_squares_problem(std::uint64_t seed, std::size_t horizon,
                                                                  std::vector<double> gains, Vector target,
                                                                  ConstraintSet constraint, const NoiseModel& noise) {
  if (target.size() != constraint.dimension()) throw ParameterError("target dimension does not match the constraint");
  std::vector<Vector> tr(horizon, target);
  auto e = draw_noise(seed, horizon, gains.size(), target.size(), noise);
  return std::make_shared<LeastSquaresProblem>(std::move(gains), std::move(tr), std::move(e), std::move(constraint));
}

double path_variation(const std::vector<Vector>& points) {
  if (points.empty()) throw ParameterError("path_variation needs a non-empty trace");
  double s = 0.0;
  for (std::size_t t = 1; t < points.size(); ++t) s += distance(points[t], points[t - 1]);
  return s;
}

MinimizerTrace minimizer_trace(const OnlineProblem& problem) {
  MinimizerTrace tr;
  tr.points.reserve(problem.horizon());
  for (std::size_t t = 1; t <= problem.horizon(); ++t) tr.points.push_back(problem.minimizer(t));
  tr.variation = path_variation(tr.points);
  return tr;
}

}  // namespace zomd::problems
