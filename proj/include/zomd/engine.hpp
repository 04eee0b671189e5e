// SPDX-License-Identifier: Apache-2.0
//
// The online distributed loop. Each round t, every agent i
//   1. is charged f^t(x_i(t)) - f^t(x*(t)),
//   2. forms a clipped kernel gradient estimate at x_i(t),
//   3. averages its neighbours' states, y_i = sum_j a_ij(t) x_j(t),
//   4. takes a mirror step from y_i.
// All agents act on the round-start snapshot.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zomd/common.hpp"
#include "zomd/graph.hpp"
#include "zomd/kernels.hpp"
#include "zomd/mirror.hpp"
#include "zomd/problems.hpp"

namespace zomd::engine {

/// scale * (t + 1)^power + offset
struct PowerLaw {
  double scale = 1.0;
  double power = 0.0;
  double offset = 0.0;
  double operator()(std::size_t t) const;
};

enum class Admissibility { kAdmissible, kMarginal, kInadmissible };
const char* to_string(Admissibility a);

struct StepSchedules {
  PowerLaw alpha;  // clipping radius; offset is the 2G term
  PowerLaw beta;   // step size
  PowerLaw gamma;  // estimation radius

  /// 0 < a < 1/2, -1 < b < -2a, c < 0 on the exponents; b == -2a (within
  /// 1e-12) is reported as marginal.
  Admissibility admissibility() const;

  /// alpha_t = 0.2 (t+1)^0.3 + 2, beta_t = 15 (t+1)^-0.6, gamma_t = 0.2 (t+1)^-0.25.
  static StepSchedules sensor_network();
};

using ProblemFactory = std::function<problems::ProblemPtr(std::uint64_t seed, std::size_t horizon)>;

struct RunConfig {
  ProblemFactory problem;
  graph::GraphSchedule graph;
  kernels::Kernel kernel;
  mirror::MirrorMap mirror;
  StepSchedules schedules;
  std::size_t horizon = 1000;
  std::uint64_t seed = 1;
  /// Additive noise on every finite difference, the xi channel of the estimator.
  problems::NoiseModel oracle_noise = problems::NoiseModel::none();
  bool per_coordinate_r = false;
  /// Run even if alpha_t < 2G somewhere or the schedules are inadmissible.
  bool allow_violations = false;
  /// Replaces the problem's gradient bound G.
  std::optional<double> gradient_bound;
  /// x_i(1); defaults to spread points of the constraint set.
  std::optional<std::vector<Vector>> initial_states;
};

struct RunMetrics {
  std::size_t agents = 0;
  std::size_t dimension = 0;
  std::size_t horizon = 0;
  double gradient_bound = 0.0;
  /// regret[t-1][i] = R_i(t), cumulative.
  std::vector<std::vector<double>> regret;
  /// consensus_error[t-1] = max_i ||x_i(t) - xbar(t)|| for t = 1..T+1.
  std::vector<double> consensus_error;
  /// clip_active[t-1][i]
  std::vector<std::vector<char>> clip_active;
  std::vector<double> clip_rate;
  /// states[t-1][i] = x_i(t) for t = 1..T+1.
  std::vector<std::vector<Vector>> states;
  problems::MinimizerTrace benchmark;
  /// variation_cum[t-1] = sum_{s<t} ||x*(s+1) - x*(s)||; the last entry is Xi_T.
  std::vector<double> variation_cum;
  std::vector<double> alpha, beta;  // per round
  std::size_t oracle_calls = 0;
  std::vector<std::string> warnings;

  double regret_avg(std::size_t t, std::size_t agent) const { return regret[t - 1][agent] / static_cast<double>(t); }
  double worst_regret_avg(std::size_t t) const;
  Vector average_state(std::size_t t) const;
  /// Norm of the stacked initial state x(1).
  double initial_norm() const;
};

/// Execute the loop. Throws ConfigError for inconsistent configs,
/// ScheduleViolation when alpha_t < 2G (unless allowed) and NumericError on
/// any non-finite state, naming the round and agent.
RunMetrics run(const RunConfig& config);

/// Powers of two times T/64: T>>6, T>>5, ..., T (zeros dropped, duplicates merged).
std::vector<std::size_t> checkpoints(std::size_t horizon);

struct QuantileTable {
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> checkpoints;
  std::vector<double> deltas{0.1, 0.05, 0.01};
  /// worst[s][c]: worst-agent R_i(t)/t for seed s at checkpoint c.
  std::vector<std::vector<double>> worst;
  /// value[c][d]: empirical (1 - delta_d)-quantile over seeds.
  std::vector<std::vector<double>> value;
};

/// Linear-interpolation empirical quantile of `values` at level q in [0, 1].
double empirical_quantile(std::vector<double> values, double q);

/// Independent runs per seed. `on_run` (optional) sees every seed's metrics,
/// called from worker threads; results never depend on `threads`.
QuantileTable multi_seed(const RunConfig& config, const std::vector<std::uint64_t>& seeds, unsigned threads = 1,
                         const std::function<void(std::size_t, const RunMetrics&)>& on_run = {});

struct EnvelopeRow {
  std::size_t t;       // the bound concerns x(t+1)
  double consensus;    // max_i ||x_i(t+1) - xbar(t+1)||
  double envelope;     // theta1 lambda^t + theta2 sum_s alpha_s beta_s lambda^(t-s)
  double margin() const { return envelope - consensus; }
  bool pass() const { return consensus <= envelope; }
};

/// theta1 lambda^t + theta2 sum_{s=1}^{t} alpha_s beta_s lambda^{t-s}, t = 1..T,
/// with theta1 = sqrt(nm) C ||x(1)|| / lambda and theta2 = sqrt(nm) C / (mu lambda).
std::vector<double> consensus_envelope(const graph::MixingConstants& mixing, std::size_t agents, std::size_t dimension,
                                       double initial_norm, double mu, const std::vector<double>& alpha,
                                       const std::vector<double>& beta);

std::vector<EnvelopeRow> consensus_envelope_check(const RunMetrics& metrics, const graph::MixingConstants& mixing,
                                                  double mu = 1.0);

}  // namespace zomd::engine
