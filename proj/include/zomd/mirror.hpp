// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "zomd/common.hpp"
#include "zomd/problems.hpp"

namespace zomd::mirror {

/// Mirror map phi. Euclidean: phi(x) = ||x||^2 / 2. Negative entropy:
/// phi(x) = sum x_k ln x_k on the positive orthant; it is 1-strongly convex
/// on the simplex with respect to the 1-norm (and hence the 2-norm).
class MirrorMap {
 public:
  enum class Kind { kEuclidean, kNegativeEntropy };

  static MirrorMap euclidean() { return MirrorMap(Kind::kEuclidean); }
  static MirrorMap negative_entropy() { return MirrorMap(Kind::kNegativeEntropy); }
  static MirrorMap from_name(const std::string& name);

  Kind kind() const noexcept { return kind_; }
  double mu() const noexcept { return 1.0; }
  std::string name() const;

  double value(std::span<const double> x) const;
  Vector gradient(std::span<const double> x) const;

 private:
  explicit MirrorMap(Kind kind) : kind_(kind) {}
  Kind kind_;
};

/// D(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
double bregman(const MirrorMap& map, std::span<const double> x, std::span<const double> y);

struct StepSpec {
  Vector y;     // anchor, the post-consensus state
  Vector g;     // clipped gradient estimate
  double beta;  // step size
  const problems::ConstraintSet* set;
};

/// argmin_{x in set} beta <x, g> + D(x, y), in closed form for the supported
/// pairs: euclidean with any set (projected step), negative entropy with the
/// simplex (multiplicative weights). Other pairs throw ConfigError.
Vector md_step(const MirrorMap& map, const StepSpec& spec);

/// The objective md_step minimizes.
double step_objective(const MirrorMap& map, const StepSpec& spec, std::span<const double> x);

/// Brute-force argmin of step_objective over nested grids of the set (m <= 2).
/// Each level scans a 101-point-per-axis grid around the incumbent and shrinks
/// the window until the grid spacing is below `resolution`.
Vector md_step_oracle(const MirrorMap& map, const StepSpec& spec, double resolution);

/// Lipschitz constant of D(., y) in its first argument over a box, for the
/// euclidean map: sup ||x - y|| = diameter.
double euclidean_bregman_lipschitz(const problems::ConstraintSet& set);

}  // namespace zomd::mirror
