// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "zomd/graph.hpp"

using namespace zomd;
using namespace zomd::graph;

namespace {

WeightMatrix averaging(std::size_t n) { return WeightMatrix(n, std::vector<double>(n * n, 1.0 / n), 1.0 / n); }

// Two 2-cycles {0,1} and {2,3} that never exchange information.
GraphSchedule split_schedule(std::size_t window) {
  const auto a = WeightMatrix::from_rows({{0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}, {0, 0, 0.5, 0.5}}, 0.5);
  return GraphSchedule({a, WeightMatrix::identity(4, 0.5)}, ScheduleMode::kCyclic, window);
}

// Dense product A(t)...A(s) computed independently of product_deviation.
std::vector<std::vector<double>> product(const GraphSchedule& g, std::size_t t, std::size_t s) {
  const std::size_t n = g.agents();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) p[i][i] = 1.0;
  for (std::size_t k = s; k <= t; ++k) {
    const auto& a = g.at(k);
    std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) q[i][j] += a(i, l) * p[l][j];
    p = q;
  }
  return p;
}

}  // namespace

TEST_CASE("validate_weight_matrix") {
  CHECK(validate_weight_matrix(WeightMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}, 0.4)).empty());
  CHECK(validate_weight_matrix(WeightMatrix::identity(3, 0.5)).empty());

  const auto v = validate_weight_matrix(WeightMatrix::from_rows({{0.7, 0.3}, {0.5, 0.5}}, 0.3));
  REQUIRE(v.size() == 2);
  CHECK(v[0].kind == Violation::Kind::kColumnSum);
  CHECK(v[0].col == 0);
  CHECK(v[0].observed == doctest::Approx(1.2));
  CHECK(v[0].message.find("column 0") != std::string::npos);
  CHECK(v[1].col == 1);
  CHECK(v[1].observed == doctest::Approx(0.8));
}

TEST_CASE("validate_weight_matrix flags small entries, zero diagonal and negatives") {
  auto has = [](const std::vector<Violation>& v, Violation::Kind k) {
    for (const auto& x : v)
      if (x.kind == k) return true;
    return false;
  };
  CHECK(has(validate_weight_matrix(WeightMatrix::from_rows({{0.9, 0.1}, {0.1, 0.9}}, 0.2)), Violation::Kind::kEntryRange));
  CHECK(has(validate_weight_matrix(WeightMatrix::from_rows({{0, 1}, {1, 0}}, 0.5)), Violation::Kind::kDiagonal));
  CHECK(has(validate_weight_matrix(WeightMatrix::from_rows({{1.5, -0.5}, {-0.5, 1.5}}, 0.5)), Violation::Kind::kNegative));
  const auto rows = validate_weight_matrix(WeightMatrix::from_rows({{0.6, 0.6}, {0.4, 0.4}}, 0.4));
  CHECK(has(rows, Violation::Kind::kRowSum));
}

TEST_CASE("weight matrix construction errors") {
  CHECK_THROWS_AS(WeightMatrix(2, {1, 0, 0}, 0.5), ParameterError);
  CHECK_THROWS_AS(WeightMatrix::identity(2, 0.0), ParameterError);
  CHECK_THROWS_AS(WeightMatrix::identity(2, 1.5), ParameterError);
  CHECK_THROWS_AS(GraphSchedule({WeightMatrix::identity(2, 0.5), WeightMatrix::identity(3, 0.5)}, ScheduleMode::kCyclic, 1),
                  ParameterError);
  CHECK_THROWS_AS(GraphSchedule({WeightMatrix::identity(2, 0.5)}, ScheduleMode::kCyclic, 0), ParameterError);
}

TEST_CASE("schedule indexing") {
  const auto g = fig1_schedule();
  CHECK(&g.at(1) == &g.matrices()[0]);
  CHECK(&g.at(5) == &g.matrices()[0]);
  CHECK(&g.at(8) == &g.matrices()[3]);
  CHECK_THROWS_AS(g.at(0), ParameterError);

  const GraphSchedule e(g.matrices(), ScheduleMode::kExplicit, 4);
  CHECK_NOTHROW(e.at(4));
  CHECK_THROWS_AS(e.at(5), ParameterError);
}

TEST_CASE("fig1 preset") {
  const auto g = preset("fig1");
  CHECK(g.agents() == 6);
  CHECK(g.period() == 4);
  CHECK(g.window() == 4);
  CHECK(g.l_bound() == 0.5);
  for (const auto& a : g.matrices()) {
    CHECK(validate_weight_matrix(a).empty());
    std::vector<std::vector<std::size_t>> adj(6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        if (a.has_edge(i, j)) adj[i].push_back(j);
    CHECK_FALSE(strongly_connected(adj));
  }
  // (a) 1 -> 2 -> 3 -> 1, zero-based
  const auto& a = g.matrices()[0];
  CHECK(a.has_edge(0, 1));
  CHECK(a.has_edge(1, 2));
  CHECK(a.has_edge(2, 0));
  CHECK_FALSE(a.has_edge(1, 0));
  CHECK(a(1, 0) == 0.5);
  CHECK(a(1, 1) == 0.5);
}

TEST_CASE("uniform connectivity") {
  CHECK(check_uniform_connectivity(fig1_schedule()).connected);
  CHECK(check_uniform_connectivity(preset("complete", 5)).connected);
  CHECK_FALSE(check_uniform_connectivity(preset("identity", 3)).connected);
  for (std::size_t u : {1, 2, 3, 7}) {
    const auto r = check_uniform_connectivity(split_schedule(u));
    CHECK_FALSE(r.connected);
    CHECK(r.first_failing_window == 0u);
  }
}

TEST_CASE("misdeclared window names the first bad window") {
  const auto fig1 = fig1_schedule();
  const auto& m = fig1.matrices();
  // (a,b,c) is connected, (b,c,d) misses every edge into agent 2
  const auto r3 = check_uniform_connectivity(GraphSchedule(m, ScheduleMode::kCyclic, 3));
  CHECK_FALSE(r3.connected);
  CHECK(r3.first_failing_window == 1u);
  const auto r2 = check_uniform_connectivity(GraphSchedule(m, ScheduleMode::kCyclic, 2));
  CHECK(r2.first_failing_window == 0u);

  // explicit: only starts 0..P-U are windows
  CHECK(check_uniform_connectivity(GraphSchedule({m[0], m[1], m[2], m[3], m[0]}, ScheduleMode::kExplicit, 4)).connected);
  const auto e = check_uniform_connectivity(GraphSchedule({m[0], m[1], m[2], m[3], m[3]}, ScheduleMode::kExplicit, 4));
  CHECK(e.first_failing_window == 1u);
  CHECK_FALSE(check_uniform_connectivity(GraphSchedule({m[0], m[1]}, ScheduleMode::kExplicit, 4)).connected);
}

TEST_CASE("connectivity is invariant under rotation") {
  for (std::size_t u : {2, 3, 4, 5}) {
    const GraphSchedule g(fig1_schedule().matrices(), ScheduleMode::kCyclic, u);
    const bool base = check_uniform_connectivity(g).connected;
    for (std::size_t s = 1; s < 4; ++s) CHECK(check_uniform_connectivity(g.rotated(s)).connected == base);
  }
}

TEST_CASE("strongly_connected") {
  CHECK(strongly_connected({{}}));
  CHECK(strongly_connected({{1}, {2}, {0}}));
  CHECK_FALSE(strongly_connected({{1}, {2}, {}}));
  using Adjacency = std::vector<std::vector<std::size_t>>;
  CHECK_FALSE(strongly_connected(Adjacency{{1}, {0}, {3}, {2}}));
  CHECK(strongly_connected(Adjacency{{0, 1}, {0}}));
}

TEST_CASE("mixing constants") {
  const auto a = mixing_constants(2, 1, 0.5);
  CHECK(a.C == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(a.lambda == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mixing_constants(2, 1, 0.99).lambda < mixing_constants(2, 1, 0.9).lambda);
  const auto b = mixing_constants(3, 2, 0.1);
  CHECK(b.lambda > 0.0);
  CHECK(b.lambda < 1.0);
  CHECK(b.C > 0.0);
  // (n-1)U = 20, l = 1/2: lambda = (1 - 2^-20)^(1/20)
  const double q = std::ldexp(1.0, -20);
  const auto c = mixing_constants(6, 4, 0.5);
  CHECK(c.lambda == doctest::Approx(std::pow(1.0 - q, 1.0 / 20.0)).epsilon(1e-15));
  CHECK(c.C == doctest::Approx(2.0 * (1.0 + 1.0 / q) / (1.0 - q)).epsilon(1e-15));
  CHECK_THROWS_AS(mixing_constants(1, 1, 0.5), ParameterError);
  CHECK_THROWS_AS(mixing_constants(2, 0, 0.5), ParameterError);
  CHECK_THROWS_AS(mixing_constants(2, 1, 1.0), ParameterError);
}

TEST_CASE("mix") {
  const auto avg = GraphSchedule({WeightMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}, 0.5)}, ScheduleMode::kCyclic, 1);
  const auto y = mix(avg, 1, {{0.0}, {2.0}});
  CHECK(y[0][0] == 1.0);
  CHECK(y[1][0] == 1.0);

  const std::vector<Vector> x{{1.5, -2}, {3, 7}, {0.25, 1}};
  CHECK(mix(WeightMatrix::identity(3, 1.0), x) == x);

  const auto g = fig1_schedule();
  const std::vector<Vector> s{{1}, {2}, {3}, {4}, {5}, {6}};
  for (std::size_t t = 1; t <= 4; ++t) {
    double mean = 0.0;
    for (const auto& v : mix(g, t, s)) mean += v[0];
    CHECK(mean / 6.0 == doctest::Approx(3.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mix(g, 1, {{1}, {2}}), ParameterError);
  CHECK_THROWS_AS(mix(g, 1, {{1}, {2}, {3}, {4}, {5}, {6, 7}}), ParameterError);
}

TEST_CASE("mix preserves the average on random doubly stochastic matrices") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int rep = 0; rep < 50; ++rep) {
    // convex combination of permutation matrices is doubly stochastic
    const std::size_t n = 5;
    std::vector<double> e(n * n, 0.0);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    for (int k = 0; k < 4; ++k) {
      std::shuffle(perm.begin(), perm.end(), gen);
      for (std::size_t i = 0; i < n; ++i) e[i * n + perm[i]] += 0.25;
    }
    const WeightMatrix a(n, e, 0.25);
    std::vector<Vector> x(n, Vector(3));
    for (auto& v : x)
      for (double& c : v) c = u(gen);
    const auto y = mix(a, x);
    for (std::size_t k = 0; k < 3; ++k) {
      double before = 0, after = 0;
      for (std::size_t i = 0; i < n; ++i) {
        before += x[i][k];
        after += y[i][k];
      }
      CHECK(std::abs(before - after) / n <= 1e-9);
    }
  }
}

TEST_CASE("product deviation") {
  const auto id = GraphSchedule({WeightMatrix::identity(2, 0.5)}, ScheduleMode::kCyclic, 1);
  CHECK(product_deviation(id, 1, 1) == 0.5);
  CHECK(product_deviation(id, 9, 3) == 0.5);
  const auto full = GraphSchedule({averaging(4)}, ScheduleMode::kCyclic, 1);
  CHECK(product_deviation(full, 5, 2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(product_deviation(id, 2, 3), ParameterError);
  CHECK_THROWS_AS(product_deviation(id, 2, 0), ParameterError);

  const auto g = fig1_schedule();
  const auto mc = mixing_constants(6, 4, g.l_bound());
  for (std::size_t s = 1; s <= 4; ++s) {
    const std::size_t t = s + 40;
    const auto p = product(g, t, s);
    double dev = 0.0;
    for (const auto& row : p)
      for (double v : row) dev = std::max(dev, std::abs(v - 1.0 / 6.0));
    CHECK(product_deviation(g, t, s) == doctest::Approx(dev).epsilon(1e-12));
    CHECK(dev <= mc.C * std::pow(mc.lambda, 40.0));
  }
}

TEST_CASE("presets") {
  CHECK(preset("complete", 3).agents() == 3);
  CHECK(validate_weight_matrix(preset("complete", 7).matrices()[0]).empty());
  CHECK_THROWS_AS(preset("fig1", 5), ConfigError);
  CHECK_THROWS_AS(preset("complete"), ConfigError);
  CHECK_THROWS_AS(preset("ring", 4), ConfigError);
}
