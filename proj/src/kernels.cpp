// SPDX-License-Identifier: Apache-2.0
#include "zomd/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/core.h>

#include "zomd/common.hpp"
#include "zomd/quadrature.hpp"

namespace zomd::kernels {

namespace {

double horner(const std::vector<double>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

// Monomial coefficients of P_0..P_n via (k+1) P_{k+1} = (2k+1) r P_k - k P_{k-1}.
std::vector<std::vector<double>> legendre_monomials(std::size_t n) {
  std::vector<std::vector<double>> p(n + 1, std::vector<double>(n + 1, 0.0));
  p[0][0] = 1.0;
  if (n >= 1) p[1][1] = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    for (std::size_t j = 0; j <= n; ++j) {
      double v = -kk * p[k - 1][j];
      if (j >= 1) v += (2.0 * kk + 1.0) * p[k][j - 1];
      p[k + 1][j] = v / (kk + 1.0);
    }
  }
  return p;
}

}  // namespace

Kernel::Kernel(std::string name, std::size_t order, std::function<double(double)> fn)
    : name_(std::move(name)), order_(order), fn_(std::move(fn)) {
  if (order_ == 0) throw ParameterError("kernel order must be positive");
}

Kernel Kernel::polynomial(std::string name, std::size_t order, std::vector<double> coefficients) {
  auto c = coefficients;
  Kernel k(std::move(name), order, [c = std::move(c)](double r) { return horner(c, r); });
  k.coefficients_ = std::move(coefficients);
  return k;
}

Kernel example_kernel() {
  // (15 r / 4)(5 - 7 r^2) = 75/4 r - 105/4 r^3
  return Kernel::polynomial("example", 3, {0.0, 75.0 / 4.0, 0.0, -105.0 / 4.0});
}

Kernel legendre_kernel(std::size_t ell) {
  if (ell < 3 || ell % 2 == 0) {
    throw ParameterError(fmt::format("legendre kernel order must be odd and >= 3, got {}", ell));
  }
  const auto p = legendre_monomials(ell);
  std::vector<double> c(ell + 1, 0.0);
  for (std::size_t k = 1; k <= ell; k += 2) {
    const double weight = (2.0 * static_cast<double>(k) + 1.0) * p[k][1];  // (2k+1) P_k'(0)
    for (std::size_t j = 0; j <= ell; ++j) c[j] += weight * p[k][j];
  }
  return Kernel::polynomial(fmt::format("legendre:{}", ell), ell, std::move(c));
}

Kernel from_spec(const std::string& spec, std::optional<std::size_t> order) {
  if (spec == "example") return example_kernel();
  if (spec.rfind("legendre:", 0) == 0) {
    const auto digits = spec.substr(9);
    std::size_t ell = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ell);
    if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
      throw ParameterError(fmt::format("kernel '{}' needs an integer order", spec));
    }
    return legendre_kernel(ell);
  }
  std::vector<double> c;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      c.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParameterError(fmt::format("kernel '{}' is neither a known name nor a coefficient list", spec));
    }
  }
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.empty()) throw ParameterError("empty kernel coefficient list");
  const std::size_t degree = c.size() - 1;
  const std::size_t ord = order.value_or(std::max<std::size_t>(degree, 1));
  return Kernel::polynomial("polynomial", ord, std::move(c));
}

MomentReport check_moments(const Kernel& k, double eps, double tolerance) {
  if (!(eps >= 2.0)) throw ParameterError(fmt::format("eps must be >= 2, got {}", eps));
  MomentReport rep;
  rep.eps = eps;
  rep.tolerance = tolerance;
  quadrature::AdaptiveOptions opt;
  opt.abs_tolerance = 1e-10;

  // split at 0 so |r|^eps is smooth on each panel
  auto integral = [&](const std::function<double(double)>& f) {
    const auto left = quadrature::integrate(f, -1.0, 0.0, opt);
    const auto right = quadrature::integrate(f, 0.0, 1.0, opt);
    rep.converged = rep.converged && left.converged && right.converged;
    rep.residual = std::max(rep.residual, left.error_estimate + right.error_estimate);
    return left.value + right.value;
  };

  for (std::size_t a = 0; a <= k.order(); ++a) {
    const double p = static_cast<double>(a);
    const double v = integral([&](double r) { return std::pow(r, p) * k(r); });
    const double required = a == 1 ? 2.0 : 0.0;
    rep.moments.push_back({a, v, required});
    rep.max_violation = std::max(rep.max_violation, std::abs(v - required));
  }
  rep.kappa = integral([&](double r) {
    const double v = k(r);
    return v * v;
  });
  rep.kappa_eps = integral([&](double r) { return std::pow(std::abs(r), eps) * std::abs(k(r)); });
  if (!std::isfinite(rep.kappa) || !std::isfinite(rep.kappa_eps)) rep.converged = false;
  return rep;
}

std::string format_report(const Kernel& k, const MomentReport& report) {
  std::string out = fmt::format("kernel {} (order {}), eps = {}\n", k.name(), k.order(), report.eps);
  out += fmt::format("{:>8}  {:>24}  {:>10}  {:>12}\n", "power", "integral r^a K(r) dr", "required", "deviation");
  for (const auto& m : report.moments) {
    out += fmt::format("{:>8}  {:>24.17g}  {:>10g}  {:>12.3e}\n", m.power, m.value, m.required,
                       std::abs(m.value - m.required));
  }
  out += fmt::format("kappa      = {:.17g}\n", report.kappa);
  out += fmt::format("kappa_eps  = {:.17g}\n", report.kappa_eps);
  out += fmt::format("max violation {:.3e} (tolerance {:.1e}), quadrature residual {:.3e}{}\n", report.max_violation,
                     report.tolerance, report.residual, report.converged ? "" : " NOT CONVERGED");
  out += report.passed() ? "PASS\n" : "FAIL\n";
  return out;
}

}  // namespace zomd::kernels
