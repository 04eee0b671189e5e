// SPDX-License-Identifier: Apache-2.0
//
// Canned experiments behind the command-line tool.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zomd/engine.hpp"
#include "zomd/estimator.hpp"
#include "zomd/graph.hpp"

namespace zomd::experiments {

/// Pearson correlation of two equally long series.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

/// R(t)/t strictly decreasing over `points` for every given series.
bool strictly_decreasing(const std::vector<double>& series);

struct ReproduceOptions {
  std::uint64_t seed = 1;      // the single traced run; the quantile pass uses seed..seed+seeds-1
  std::size_t seeds = 20;
  std::size_t horizon = 5000;
  unsigned threads = 1;
  /// Also add oracle noise of this kind on the estimator's xi channel.
  std::optional<problems::NoiseModel> oracle_noise;
};

struct SeedSummary {
  std::uint64_t seed;
  double tracking_correlation;  // corr(z(t), mean_i x_i(t)) over t in [T/2, T]
  bool worst_agent_decreasing;  // worst-agent R(t)/t at T/8, T/4, T/2, T
  bool every_agent_decreasing;
  bool envelope_holds;
};

struct ReproduceResult {
  engine::RunMetrics traced;
  engine::QuantileTable quantiles;
  std::vector<SeedSummary> per_seed;
  std::vector<std::size_t> late_checkpoints;  // T/8, T/4, T/2, T
  double decreasing_fraction = 0.0;           // of seeds, worst-agent criterion
  bool quantile_curve_decreasing = false;     // 0.95 quantile over the late checkpoints
  double min_correlation = 0.0;
  bool envelope_holds = false;
  std::vector<std::string> warnings;
  /// Sublinearity holds for >= 95% of seeds and the 0.95-quantile decreases.
  bool sublinear() const { return decreasing_fraction >= 0.95 && quantile_curve_decreasing; }
};

engine::RunConfig sensor_network_config(std::uint64_t seed, std::size_t horizon);

ReproduceResult reproduce_paper(const ReproduceOptions& options);

/// Writes trajectory.csv, regret_over_t.csv, metrics.csv, benchmark.csv,
/// noise.csv and quantiles.csv into `dir`.
void write_reproduction(const ReproduceResult& result, const ReproduceOptions& options,
                        const std::filesystem::path& dir);

std::string format_reproduction(const ReproduceResult& result);

/// Validation report of a graph schedule; `ok` is false on any violation.
struct GraphReport {
  bool ok = true;
  std::string text;
};
GraphReport check_graph(const graph::GraphSchedule& schedule, std::optional<double> l = std::nullopt);

/// Builtin scalar test functions for bias sweeps: f(x) = sum_k x_k^p.
problems::ProblemPtr power_function_problem(unsigned power, std::size_t dimension);

}  // namespace zomd::experiments
