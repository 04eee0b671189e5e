// SPDX-License-Identifier: Apache-2.0
#include "zomd/mirror.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace zomd::mirror {

using problems::ConstraintSet;

MirrorMap MirrorMap::from_name(const std::string& name) {
  if (name == "euclidean") return euclidean();
  if (name == "negative-entropy" || name == "entropy") return negative_entropy();
  throw ConfigError(fmt::format("unknown mirror map '{}' (known: euclidean, negative-entropy)", name));
}

std::string MirrorMap::name() const { return kind_ == Kind::kEuclidean ? "euclidean" : "negative-entropy"; }

double MirrorMap::value(std::span<const double> x) const {
  if (kind_ == Kind::kEuclidean) return 0.5 * dot(x, x);
  double s = 0.0;
  for (double v : x) {
    if (v < 0.0) throw DomainError(fmt::format("negative entropy undefined at negative coordinate {}", v));
    if (v > 0.0) s += v * std::log(v);
  }
  return s;
}

Vector MirrorMap::gradient(std::span<const double> x) const {
  Vector g(x.begin(), x.end());
  if (kind_ == Kind::kEuclidean) return g;
  for (double& v : g) {
    if (!(v > 0.0)) throw DomainError(fmt::format("negative entropy gradient undefined at coordinate {}", v));
    v = 1.0 + std::log(v);
  }
  return g;
}

double bregman(const MirrorMap& map, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("bregman: dimension mismatch");
  if (map.kind() == MirrorMap::Kind::kEuclidean) {
    const double d = distance(x, y);
    return 0.5 * d * d;
  }
  // sum x ln(x/y) - x + y, the expanded form of the definition
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(y[k] > 0.0) || x[k] < 0.0) {
      throw DomainError(fmt::format("entropy Bregman divergence needs x >= 0 and y > 0 (coordinate {})", k));
    }
    if (x[k] > 0.0) s += x[k] * std::log(x[k] / y[k]);
    s += y[k] - x[k];
  }
  return s;
}

Vector md_step(const MirrorMap& map, const StepSpec& spec) {
  const auto& set = *spec.set;
  const std::size_t m = set.dimension();
  if (spec.y.size() != m || spec.g.size() != m) throw ParameterError("md_step: dimension mismatch");
  if (!(spec.beta > 0.0)) throw ParameterError(fmt::format("md_step: step size must be positive, got {}", spec.beta));
  if (map.kind() == MirrorMap::Kind::kEuclidean) {
    Vector z(m);
    for (std::size_t k = 0; k < m; ++k) z[k] = spec.y[k] - spec.beta * spec.g[k];
    return set.project(z);
  }
  if (set.kind() != ConstraintSet::Kind::kSimplex) {
    throw ConfigError("negative-entropy mirror map is only supported on the simplex "
                      "(supported pairs: euclidean with box/ball/simplex, negative-entropy with simplex)");
  }
  Vector w(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (!(spec.y[k] > 0.0)) {
      throw DomainError(fmt::format("entropy step needs a strictly positive anchor (coordinate {} is {})", k, spec.y[k]));
    }
    w[k] = std::log(spec.y[k]) - spec.beta * spec.g[k];
  }
  const double top = *std::max_element(w.begin(), w.end());
  double z = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : w) v /= z;
  return w;
}

double step_objective(const MirrorMap& map, const StepSpec& spec, std::span<const double> x) {
  return spec.beta * dot(x, spec.g) + bregman(map, x, spec.y);
}

namespace {

// Scan lo..hi (per axis) with `points` samples and return the best feasible point.
struct GridResult {
  Vector arg;
  double value = std::numeric_limits<double>::infinity();
};

}  // namespace

Vector md_step_oracle(const MirrorMap& map, const StepSpec& spec, double resolution) {
  const auto& set = *spec.set;
  const std::size_t m = set.dimension();
  if (m > 2) throw ParameterError("md_step_oracle only supports dimension <= 2");
  if (!(resolution > 0.0)) throw ParameterError("md_step_oracle: resolution must be positive");
  if (map.kind() == MirrorMap::Kind::kNegativeEntropy && set.kind() != ConstraintSet::Kind::kSimplex) {
    throw ConfigError("negative-entropy mirror map is only supported on the simplex");
  }

  // Parameter space: u in [lo, hi]^d mapped to a candidate point of the set.
  std::size_t d = m;
  Vector lo(m), hi(m);
  std::function<std::optional<Vector>(const Vector&)> embed;
  switch (set.kind()) {
    case ConstraintSet::Kind::kBox:
      lo = set.lower();
      hi = set.upper();
      embed = [](const Vector& u) { return std::optional<Vector>(u); };
      break;
    case ConstraintSet::Kind::kBall:
      for (std::size_t k = 0; k < m; ++k) {
        lo[k] = set.center()[k] - set.radius();
        hi[k] = set.center()[k] + set.radius();
      }
      embed = [&set](const Vector& u) -> std::optional<Vector> {
        if (!set.contains(u, 0.0)) return std::nullopt;
        return u;
      };
      break;
    case ConstraintSet::Kind::kSimplex:
      if (m == 1) return {1.0};
      d = 1;
      lo = {0.0};
      hi = {1.0};
      embed = [](const Vector& u) { return std::optional<Vector>(Vector{u[0], 1.0 - u[0]}); };
      break;
  }

  constexpr std::size_t kPoints = 101;
  Vector wlo(lo.begin(), lo.begin() + static_cast<std::ptrdiff_t>(d));
  Vector whi(hi.begin(), hi.begin() + static_cast<std::ptrdiff_t>(d));
  GridResult best;
  Vector best_u;
  for (int level = 0; level < 200; ++level) {
    double spacing = 0.0;
    for (std::size_t k = 0; k < d; ++k) spacing = std::max(spacing, (whi[k] - wlo[k]) / (kPoints - 1));
    Vector u(d);
    const std::size_t total = d == 1 ? kPoints : kPoints * kPoints;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t j = rem % kPoints;
        rem /= kPoints;
        u[k] = wlo[k] + (whi[k] - wlo[k]) * static_cast<double>(j) / (kPoints - 1);
      }
      const auto x = embed(u);
      if (!x) continue;
      const double v = step_objective(map, spec, *x);
      if (v < best.value) {
        best.value = v;
        best.arg = *x;
        best_u = u;
      }
    }
    if (best.arg.empty()) throw ConvergenceError("md_step_oracle: no feasible grid point");
    if (spacing <= resolution * 0.1) break;
    // zoom to +-2 cells around the incumbent
    for (std::size_t k = 0; k < d; ++k) {
      const double half = 2.0 * (whi[k] - wlo[k]) / (kPoints - 1);
      wlo[k] = std::max(lo[k], best_u[k] - half);
      whi[k] = std::min(hi[k], best_u[k] + half);
    }
  }
  return best.arg;
}

double euclidean_bregman_lipschitz(const ConstraintSet& set) { return set.diameter(); }

}  // namespace zomd::mirror
