// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "zomd/problems.hpp"

using namespace zomd;
using namespace zomd::problems;

namespace {

// Minimizer of f^t on [lo, hi] by exhaustive search with the given step.
double grid_minimizer(const OnlineProblem& p, std::size_t t, double lo, double hi, double step) {
  double best = lo, fbest = p.global_objective(t, Vector{lo});
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    const double f = p.global_objective(t, Vector{x});
    if (f < fbest) {
      fbest = f;
      best = x;
    }
  }
  return best;
}

std::shared_ptr<LeastSquaresProblem> scalar_ls(double y) {
  return static_least_squares_problem(1, 1, {1.0}, {y}, ConstraintSet::box(1, -5, 5), NoiseModel::none());
}

}  // namespace

TEST_CASE("projection") {
  CHECK(ConstraintSet::box(1, -5, 5).project(Vector{7.0}) == Vector{5.0});
  const auto p = ConstraintSet::ball({0, 0}, 1).project(Vector{3, 4});
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.8));
  CHECK(ConstraintSet::simplex(2).project(Vector{0.5, 0.5}) == Vector{0.5, 0.5});
  const auto s = ConstraintSet::simplex(3).project(Vector{2, 0, -1});
  CHECK(s == Vector{1, 0, 0});
  const auto s2 = project_simplex(Vector{0.8, 0.6});
  CHECK(s2[0] == doctest::Approx(0.6));
  CHECK(s2[1] == doctest::Approx(0.4));
  CHECK_THROWS_AS(ConstraintSet::box(2, -1, 1).project(Vector{1}), ParameterError);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 4.0);
  const std::vector<ConstraintSet> sets{ConstraintSet::box({-1, 0, 2}, {1, 3, 2.5}), ConstraintSet::ball({1, -1, 0}, 2),
                                        ConstraintSet::simplex(3)};
  for (const auto& set : sets) {
    for (int k = 0; k < 300; ++k) {
      Vector x(3), y(3);
      for (auto& v : x) v = nd(gen);
      for (auto& v : y) v = nd(gen);
      const auto px = set.project(x), py = set.project(y);
      CHECK(set.contains(px, 1e-12));
      CHECK(distance(set.project(px), px) <= 1e-12);
      CHECK(distance(px, py) <= distance(x, y) + 1e-12);
    }
  }
}

TEST_CASE("constraint sets") {
  CHECK(ConstraintSet::box(1, -5, 5).diameter() == 10.0);
  CHECK(ConstraintSet::box({0, 0}, {3, 4}).diameter() == 5.0);
  CHECK(ConstraintSet::ball({1, 1}, 2).diameter() == 4.0);
  CHECK(ConstraintSet::simplex(3).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(ConstraintSet::box({1}, {0}), ParameterError);
  CHECK_THROWS_AS(ConstraintSet::ball({0}, 0), ParameterError);
  CHECK_THROWS_AS(ConstraintSet::simplex(0), ParameterError);
  const auto b = ConstraintSet::box(1, -5, 5);
  CHECK(b.spread_point(0, 6) == Vector{-5});
  CHECK(b.spread_point(5, 6) == Vector{5});
  for (const auto& set : {ConstraintSet::ball({0, 0}, 1), ConstraintSet::simplex(2)}) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(set.contains(set.spread_point(k, 4), 1e-12));
  }
}

TEST_CASE("noise moments") {
  const auto f = NoiseModel::f_distribution(3, 5);
  CHECK(*f.mean() == doctest::Approx(5.0 / 3.0));
  CHECK(*f.variance() == doctest::Approx(100.0 / 9.0));
  CHECK(f.sigma_bound() == doctest::Approx(std::sqrt(100.0 / 9.0 + 25.0 / 9.0)));
  CHECK_THROWS_AS(NoiseModel::f_distribution(3, 4), ParameterError);
  CHECK_THROWS_AS(NoiseModel::gaussian(0, -1), ParameterError);

  Stream rng(11);
  const std::size_t n = 1'000'000;
  double s = 0, s2 = 0;
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = f.sample(rng);
    xs[k] = x;
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 5.0 / 3.0) < 0.02);
  // the fourth moment is infinite, so the sample variance converges slowly
  CHECK(std::abs(var - 100.0 / 9.0) / (100.0 / 9.0) < 0.25);
  std::sort(xs.begin(), xs.end());
  const double quartiles[] = {0.41502458, 0.90714622, 1.88426785};
  for (int q = 0; q < 3; ++q) CHECK(xs[n * (q + 1) / 4] == doctest::Approx(quartiles[q]).epsilon(0.01));
  CHECK(var <= f.sigma_bound() * f.sigma_bound() * 1.1);

  const auto c = NoiseModel::constant_bias(5);
  CHECK(c.sample(rng) == 5.0);
  CHECK(c.sigma_bound() == 5.0);
  CHECK(NoiseModel::none().sample(rng) == 0.0);

  const auto g = NoiseModel::gaussian(1.0, 2.0);
  double gs = 0, gs2 = 0;
  for (int k = 0; k < 200000; ++k) {
    const double x = g.sample(rng);
    gs += x;
    gs2 += x * x;
  }
  CHECK(gs / 200000 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(gs2 / 200000 <= g.sigma_bound() * g.sigma_bound() * 1.1);
}

TEST_CASE("noise specs") {
  CHECK(NoiseModel::from_spec("none").kind() == NoiseModel::Kind::kNone);
  CHECK(NoiseModel::from_spec("constant:5").parameters() == std::vector<double>{5});
  CHECK(NoiseModel::from_spec("gaussian:1:2").parameters() == std::vector<double>{1, 2});
  CHECK(NoiseModel::from_spec("f:3:5").kind() == NoiseModel::Kind::kFDistribution);
  CHECK_THROWS_AS(NoiseModel::from_spec("f:3"), ParameterError);
  CHECK_THROWS_AS(NoiseModel::from_spec("cauchy"), ParameterError);
  CHECK_THROWS_AS(NoiseModel::from_spec("constant:x"), ParameterError);
}

TEST_CASE("target trajectory") {
  const auto z = target_trajectory(3, 0.0);
  REQUIRE(z.size() == 3);
  CHECK(z[0] == doctest::Approx(0.5 * std::cos(1.0 / 60.0) + 0.5).epsilon(1e-15));
  CHECK(z[0] == doctest::Approx(0.99993).epsilon(1e-5));
  CHECK(z[1] == doctest::Approx(0.2 * z[0] + 0.5 * std::cos(2.0 / 60.0) + 0.5).epsilon(1e-15));
}

TEST_CASE("sensor network instance") {
  const auto p = sensor_network_problem(7, 200);
  CHECK(p->agents() == 6);
  CHECK(p->dimension() == 1);
  CHECK(p->horizon() == 200);
  CHECK(p->gains() == std::vector<double>{0.5, 0.1, 2, 1, 1.2, 1.8});
  const auto z = target_trajectory(200, 0.0);
  double ycap = 0.0;
  for (std::size_t t = 1; t <= 200; ++t) {
    CHECK(p->target(t)[0] == z[t - 1]);
    for (std::size_t i = 0; i < 6; ++i) {
      const double y = p->measurement(i, t)[0];
      CHECK(y == doctest::Approx(p->gains()[i] * z[t - 1] + p->noise(i, t)[0]).epsilon(1e-15));
      CHECK(p->noise(i, t)[0] > 0.0);
      ycap = std::max(ycap, std::abs(y));
    }
  }
  CHECK(p->bounds().G == doctest::Approx(2.0 * (5 * 2.0 + ycap)));
  CHECK(p->bounds().L0 == doctest::Approx(4.0));

  // same seed, same realizations; different seed, different ones
  const auto q = sensor_network_problem(7, 200);
  const auto r = sensor_network_problem(8, 200);
  CHECK(q->noise(3, 100) == p->noise(3, 100));
  CHECK(r->noise(3, 100) != p->noise(3, 100));

  // gradient against central differences
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ux(-5, 5);
  for (int k = 0; k < 200; ++k) {
    const std::size_t i = gen() % 6, t = 1 + gen() % 200;
    const double x = ux(gen), h = 1e-5;
    const double fd = (p->objective(i, t, Vector{x + h}) - p->objective(i, t, Vector{x - h})) / (2 * h);
    const double g = (*p->gradient(i, t, Vector{x}))[0];
    CHECK(std::abs(fd - g) <= 1e-6 * std::max(1.0, std::abs(g)));
    const double M = p->gains()[i];
    CHECK(g == doctest::Approx(M * (M * x - p->measurement(i, t)[0])));
    CHECK(std::abs(g) <= p->bounds().G);
  }
}

TEST_CASE("noiseless identical sensors minimize at the clamped target") {
  SensorNetworkOptions o;
  o.gains = std::vector<double>(6, 1.0);
  o.noise = NoiseModel::none();
  const auto p = sensor_network_problem(1, 50, o);
  const auto z = target_trajectory(50, 0.0);
  for (std::size_t t = 1; t <= 50; ++t) CHECK(p->minimizer(t)[0] == doctest::Approx(std::clamp(z[t - 1], -5.0, 5.0)));
}

TEST_CASE("minimizers") {
  CHECK(scalar_ls(3)->minimizer(1)[0] == doctest::Approx(3.0));
  CHECK(scalar_ls(12)->minimizer(1)[0] == 5.0);
  const auto p = sensor_network_problem(7, 100);
  const double grid = grid_minimizer(*p, 10, -5, 5, 1e-5);
  CHECK(std::abs(p->minimizer(10)[0] - grid) <= 2e-5);
  // the generic solver agrees with the closed form
  CHECK(projected_gradient_minimizer(*p, 10)[0] == doctest::Approx(p->minimizer(10)[0]).epsilon(1e-8));
  CHECK(projected_gradient_minimizer(*scalar_ls(12), 1)[0] == doctest::Approx(5.0));
}

TEST_CASE("generic minimizer needs a gradient") {
  const FunctionProblem f(1, 1, 1, ConstraintSet::box(1, -1, 1), {},
                          [](std::size_t, std::size_t, std::span<const double> x) { return x[0] * x[0]; });
  CHECK_THROWS_AS(f.minimizer(1), ConvergenceError);
  InnerSolveOptions few;
  few.max_iterations = 1;
  const FunctionProblem g(
      1, 1, 1, ConstraintSet::box(1, -1, 1), {},
      [](std::size_t, std::size_t, std::span<const double> x) { return std::cosh(x[0] - 0.3); },
      [](std::size_t, std::size_t, std::span<const double> x) { return Vector{std::sinh(x[0] - 0.3)}; });
  CHECK(g.minimizer(1)[0] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK_THROWS_AS(projected_gradient_minimizer(g, 1, few), ConvergenceError);
  CHECK_THROWS_AS(g.objective(0, 2, Vector{0.0}), ParameterError);
}

TEST_CASE("path variation") {
  CHECK(path_variation({{1.0}, {1.0}, {1.0}}) == 0.0);
  CHECK(path_variation({{0.0}, {1.0}, {0.0}, {1.0}}) == 3.0);
  CHECK(path_variation({{0.0, 0.0}, {3.0, 4.0}}) == 5.0);
  const auto p = sensor_network_problem(2, 300);
  const auto tr = minimizer_trace(*p);
  REQUIRE(tr.points.size() == 300);
  double direct = 0.0;
  for (std::size_t t = 1; t < 300; ++t) direct += std::abs(tr.points[t][0] - tr.points[t - 1][0]);
  CHECK(tr.variation == direct);
  CHECK(tr.variation <= 300 * p->constraint().diameter());
}

TEST_CASE("noise csv") {
  const auto p = sensor_network_problem(4, 2);
  std::ostringstream os;
  p->write_noise_csv(os);
  const auto s = os.str();
  CHECK(s.rfind("t,agent,e,y,z\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 13);
}
