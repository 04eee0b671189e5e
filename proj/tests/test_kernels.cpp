// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "zomd/common.hpp"
#include "zomd/kernels.hpp"
#include "zomd/quadrature.hpp"

using namespace zomd;
using namespace zomd::kernels;

namespace {

// Exact integral over [-1, 1] of r^a * sum_k c_k r^k.
double poly_moment(const std::vector<double>& c, std::size_t a) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if ((k + a) % 2 == 0) s += 2.0 * c[k] / static_cast<double>(k + a + 1);
  }
  return s;
}

}  // namespace

TEST_CASE("gauss-legendre rule") {
  const quadrature::GaussLegendre gl(20);
  double w = 0.0;
  for (double x : gl.weights()) w += x;
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  // exact through degree 39
  CHECK(gl.integrate([](double r) { return std::pow(r, 38); }, -1, 1) == doctest::Approx(2.0 / 39.0).epsilon(1e-13));
  CHECK(gl.integrate([](double r) { return r * r; }, 0, 3) == doctest::Approx(9.0).epsilon(1e-14));
  const quadrature::GaussLegendre two(2);
  CHECK(two.nodes()[0] == doctest::Approx(-1.0 / std::sqrt(3.0)));
  CHECK_THROWS_AS(quadrature::GaussLegendre(0), ParameterError);
}

TEST_CASE("adaptive quadrature") {
  const auto r = quadrature::integrate([](double x) { return std::exp(x); }, 0, 1);
  CHECK(r.converged);
  CHECK(std::abs(r.value - (std::numbers::e - 1.0)) < 1e-12);
  const auto k = quadrature::integrate([](double x) { return std::sqrt(std::abs(x)); }, -1, 1);
  CHECK(k.converged);
  CHECK(std::abs(k.value - 4.0 / 3.0) < 1e-10);
  quadrature::AdaptiveOptions tight;
  tight.max_evaluations = 100;
  const auto bad = quadrature::integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0, 1, tight);
  CHECK_FALSE(bad.converged);
  CHECK(bad.evaluations <= 200);
}

TEST_CASE("example kernel values") {
  const auto k = example_kernel();
  CHECK(k.order() == 3);
  CHECK(k(0.0) == 0.0);
  CHECK(k(1.0) == -7.5);
  for (double r = -1.0; r <= 1.0; r += 0.05) {
    CHECK(k(-r) == doctest::Approx(-k(r)));
    CHECK(k(r) == doctest::Approx(15.0 * r / 4.0 * (5.0 - 7.0 * r * r)));
  }
  REQUIRE(k.coefficients());
  CHECK(*k.coefficients() == std::vector<double>{0.0, 75.0 / 4.0, 0.0, -105.0 / 4.0});
}

TEST_CASE("example kernel moments") {
  const auto k = example_kernel();
  const auto rep = check_moments(k, 4.0);
  CHECK(rep.passed());
  REQUIRE(rep.moments.size() == 4);
  CHECK(std::abs(rep.moments[0].value) < 1e-10);
  CHECK(std::abs(rep.moments[1].value - 2.0) < 1e-10);
  CHECK(std::abs(rep.moments[2].value) < 1e-10);
  CHECK(std::abs(rep.moments[3].value) < 1e-10);
  CHECK(std::abs(rep.kappa - 37.5) < 1e-9);
  CHECK(rep.max_violation < 1e-9);
  const auto r5 = quadrature::integrate([&](double r) { return std::pow(r, 5) * k(r); }, -1, 1);
  CHECK(std::abs(r5.value + 10.0 / 21.0) < 1e-9);
  CHECK(std::abs(poly_moment(*k.coefficients(), 5) + 10.0 / 21.0) < 1e-14);
  // |r|^4 |K| is even, so twice the [0, 1] integral with the sign change at sqrt(5/7)
  const auto half = quadrature::integrate([&](double r) { return std::pow(r, 4) * std::abs(k(r)); }, 0, 1);
  CHECK(rep.kappa_eps == doctest::Approx(2.0 * half.value).epsilon(1e-9));
  CHECK_THROWS_AS(check_moments(k, 1.5), ParameterError);
}

TEST_CASE("legendre kernels") {
  const auto l3 = legendre_kernel(3);
  REQUIRE(l3.coefficients());
  const auto& c3 = *l3.coefficients();
  const auto ex = example_kernel();
  const auto& ce = *ex.coefficients();
  REQUIRE(c3.size() == ce.size());
  for (std::size_t k = 0; k < ce.size(); ++k) CHECK(c3[k] == doctest::Approx(ce[k]).epsilon(1e-13));

  for (std::size_t ell : {3, 5, 7, 9}) {
    const auto k = legendre_kernel(ell);
    CHECK(k.order() == ell);
    const auto rep = check_moments(k, static_cast<double>(ell));
    CHECK_MESSAGE(rep.passed(), "ell = " << ell);
    const auto& c = *k.coefficients();
    for (std::size_t a = 0; a <= ell; ++a) CHECK(std::abs(poly_moment(c, a) - (a == 1 ? 2.0 : 0.0)) < 1e-10);
  }
  const auto l5 = legendre_kernel(5);
  const auto r5 = quadrature::integrate([&](double r) { return std::pow(r, 5) * l5(r); }, -1, 1);
  CHECK(std::abs(r5.value) < 1e-10);

  CHECK_THROWS_AS(legendre_kernel(4), ParameterError);
  CHECK_THROWS_AS(legendre_kernel(1), ParameterError);
}

TEST_CASE("kernel specs") {
  CHECK(from_spec("example").order() == 3);
  CHECK(from_spec("legendre:5").order() == 5);
  const auto p = from_spec("0,18.75,0,-26.25");
  CHECK(p.order() == 3);
  CHECK(check_moments(p, 4).passed());
  // linear kernel 3r satisfies int rK = 2 but not the cubic condition
  const auto lin = from_spec("0,3", 3);
  const auto rep = check_moments(lin, 4);
  CHECK_FALSE(rep.passed());
  CHECK(rep.max_violation == doctest::Approx(1.2));
  CHECK(format_report(lin, rep).find("FAIL") != std::string::npos);
  CHECK(format_report(p, check_moments(p, 4)).find("PASS") != std::string::npos);
  CHECK_THROWS_AS(from_spec("legendre:x"), ParameterError);
  CHECK_THROWS_AS(from_spec("gaussian"), ParameterError);
  CHECK_THROWS_AS(from_spec(""), ParameterError);
}
