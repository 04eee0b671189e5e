// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace zomd {

/// What a stream is used for. Part of the stream key so that, e.g., the
/// measurement noise of the problem and the estimator's perturbations never
/// share draws.
enum class StreamPurpose : std::uint32_t {
  kEstimator = 1,
  kMeasurementNoise = 2,
  kHarness = 3,
};

/// A random stream keyed by (seed, agent, round, purpose).
///
/// Every agent-round gets its own engine, so the draws an agent consumes do
/// not depend on the order in which agents (or seeds) are processed.
class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  Stream(std::uint64_t seed, std::uint64_t agent, std::uint64_t round, StreamPurpose purpose)
      : engine_(make_engine(seed, agent, round, purpose)) {}

  explicit Stream(std::uint64_t seed) : Stream(seed, 0, 0, StreamPurpose::kHarness) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

 private:
  static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t agent, std::uint64_t round,
                                     StreamPurpose purpose) {
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed),  hi(seed),  lo(agent), hi(agent),
                      lo(round), hi(round), static_cast<std::uint32_t>(purpose)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace zomd
