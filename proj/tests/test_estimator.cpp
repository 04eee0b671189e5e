// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "zomd/estimator.hpp"

using namespace zomd;
using namespace zomd::estimator;
using problems::ConstraintSet;
using problems::FunctionProblem;
using problems::NoiseModel;

namespace {

FunctionProblem power(double p, std::size_t m = 1) {
  return FunctionProblem(
      1, m, 1, ConstraintSet::box(m, -10, 10), {},
      [p](std::size_t, std::size_t, std::span<const double> x) {
        double s = 0;
        for (double v : x) s += std::pow(v, p);
        return s;
      },
      [p](std::size_t, std::size_t, std::span<const double> x) {
        Vector g(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) g[k] = p * std::pow(x[k], p - 1);
        return g;
      });
}

// Counts objective evaluations.
struct Counting {
  mutable std::size_t calls = 0;
  FunctionProblem problem(std::size_t m) {
    return FunctionProblem(1, m, 1, ConstraintSet::box(m, -1, 1), {},
                           [this](std::size_t, std::size_t, std::span<const double> x) {
                             ++calls;
                             return dot(x, x);
                           });
  }
};

}  // namespace

TEST_CASE("clip") {
  const auto c = clip(Vector{3, 4}, 2.5);
  CHECK(c[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(c[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(norm(c) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(clip(Vector{1, 1}, 10) == Vector{1, 1});
  CHECK(clip(Vector{0, 0}, 1) == Vector{0, 0});
  CHECK_THROWS_AS(clip(Vector{1}, 0), ParameterError);
}

TEST_CASE("clip properties") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd(0, 5);
  std::uniform_real_distribution<double> ua(0.01, 10), uc(0.1, 10);
  for (int k = 0; k < 1000; ++k) {
    Vector v(3);
    for (auto& x : v) x = nd(gen);
    const double a = ua(gen), c = uc(gen);
    const auto cv = clip(v, a);
    CHECK(norm(cv) <= a * (1 + 1e-15));
    if (norm(v) <= a) CHECK(cv == v);
    Vector scaled(v);
    for (auto& x : scaled) x *= c;
    const auto lhs = clip(scaled, c * a);
    for (std::size_t i = 0; i < 3; ++i) CHECK(lhs[i] == doctest::Approx(c * cv[i]).epsilon(1e-12));
  }
}

TEST_CASE("estimate and clip record") {
  const auto p = power(2, 2);
  Stream rng(1, 0, 1, StreamPurpose::kEstimator);
  for (int k = 0; k < 100; ++k) {
    const auto rec = estimate_and_clip(p, 0, 1, Vector{3, -2}, 0.1, 1.0, kernels::example_kernel(), NoiseModel::none(), rng);
    CHECK(rec.oracle_calls == 4);
    CHECK(norm(rec.clipped) <= 1.0 + 1e-15);
    CHECK(rec.clip_active == (norm(rec.raw) > 1.0));
  }
}

TEST_CASE("oracle calls") {
  for (std::size_t m : {1, 2, 5}) {
    Counting c;
    const auto p = c.problem(m);
    Stream rng(2);
    const auto e = zo_estimate(p, 0, 1, Vector(m, 0.2), 0.1, kernels::example_kernel(), NoiseModel::none(), rng);
    CHECK(e.oracle_calls == 2 * m);
    CHECK(c.calls == 2 * m);
  }
}

TEST_CASE("single estimate matches the formula") {
  const auto p = power(3);
  const auto k = kernels::example_kernel();
  Stream a(5, 2, 7, StreamPurpose::kEstimator), b(5, 2, 7, StreamPurpose::kEstimator);
  const double r = std::uniform_real_distribution<double>(-1.0, 1.0)(b);
  const double x = 0.7, g = 0.3;
  const double expect = (std::pow(x + g * r, 3) - std::pow(x - g * r, 3)) / (2 * g) * k(r);
  const auto e = zo_estimate(p, 0, 1, Vector{x}, g, k, NoiseModel::none(), a);
  CHECK(e.raw[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("estimator edge cases") {
  const FunctionProblem flat(1, 2, 1, ConstraintSet::box(2, -1, 1), {},
                             [](std::size_t, std::size_t, std::span<const double>) { return 4.0; });
  Stream rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto e = zo_estimate(flat, 0, 1, Vector{0.1, 0.2}, 0.5, kernels::example_kernel(), NoiseModel::none(), rng);
    CHECK(e.raw == Vector{0, 0});
  }
  CHECK_THROWS_AS(zo_estimate(flat, 0, 1, Vector{0, 0}, 0.0, kernels::example_kernel(), NoiseModel::none(), rng),
                  ParameterError);
  CHECK_THROWS_AS(zo_estimate(flat, 0, 1, Vector{0}, 0.1, kernels::example_kernel(), NoiseModel::none(), rng),
                  ParameterError);
}

TEST_CASE("cubic is estimated without bias") {
  const auto p = power(3);
  Stream rng(42);
  const auto rows = measure_bias(p, 0, 1, Vector{1.0}, {0.5}, kernels::example_kernel(), NoiseModel::none(), 100000, rng);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].true_gradient[0] == 3.0);
  CHECK(std::abs(rows[0].mean[0] - 3.0) <= 3 * rows[0].stderr_[0]);
}

TEST_CASE("quadratic bias vanishes") {
  const auto p = power(2, 2);
  Stream rng(8);
  const auto rows = measure_bias(p, 0, 1, Vector{0.5, -1}, {0.8, 0.1}, kernels::example_kernel(), NoiseModel::none(), 50000, rng);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(row.mean[k] - row.true_gradient[k]) <= 3.5 * row.stderr_[k]);
}

TEST_CASE("quintic bias decays like gamma^4") {
  const auto p = power(5);
  Stream rng(6);
  const std::vector<double> gammas{0.4, 0.2, 0.1};
  const auto rows = measure_bias(p, 0, 1, Vector{0.0}, gammas, kernels::example_kernel(), NoiseModel::none(), 200000, rng);
  std::vector<double> bias;
  for (const auto& row : rows) {
    const double expect = -5.0 / 21.0 * std::pow(row.gamma, 4);
    CHECK(std::abs(row.mean[0] - expect) <= 3 * row.stderr_[0]);
    bias.push_back(row.bias_norm());
  }
  CHECK(log_log_slope(gammas, bias) >= 3.8);
}

TEST_CASE("non-zero-mean noise does not bias the estimate") {
  const auto p = power(2);
  for (const auto& noise : {NoiseModel::constant_bias(5.0), NoiseModel::f_distribution(3, 5)}) {
    Stream rng(12);
    const auto rows = measure_bias(p, 0, 1, Vector{0.5}, {0.3}, kernels::example_kernel(), noise, 100000, rng);
    CHECK(std::abs(rows[0].mean[0] - 1.0) <= 3 * rows[0].stderr_[0]);
  }
}

TEST_CASE("log-log slope") {
  CHECK(log_log_slope({1, 2, 4}, {1, 16, 256}) == doctest::Approx(4.0));
  CHECK_THROWS_AS(log_log_slope({1}, {1}), ParameterError);
  CHECK_THROWS_AS(log_log_slope({1, 2}, {1, 0}), ParameterError);
}

TEST_CASE("per-coordinate draws differ from shared r") {
  const auto p = power(3, 3);
  Stream a(4), b(4);
  EstimateOptions per{true};
  const auto shared = zo_estimate(p, 0, 1, Vector{1, 1, 1}, 0.2, kernels::example_kernel(), NoiseModel::none(), a);
  const auto indep = zo_estimate(p, 0, 1, Vector{1, 1, 1}, 0.2, kernels::example_kernel(), NoiseModel::none(), b, per);
  CHECK(shared.raw[0] == shared.raw[1]);
  CHECK(indep.raw[1] != indep.raw[2]);
}
