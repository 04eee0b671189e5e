// SPDX-License-Identifier: Apache-2.0
#include "zomd/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/core.h>

#include "zomd/estimator.hpp"

namespace zomd::engine {

double PowerLaw::operator()(std::size_t t) const {
  return scale * std::pow(static_cast<double>(t) + 1.0, power) + offset;
}

const char* to_string(Admissibility a) {
  switch (a) {
    case Admissibility::kAdmissible:
      return "admissible";
    case Admissibility::kMarginal:
      return "marginal";
    case Admissibility::kInadmissible:
      return "inadmissible";
  }
  return "?";
}

Admissibility StepSchedules::admissibility() const {
  const double a = alpha.power, b = beta.power, c = gamma.power;
  constexpr double kTol = 1e-12;
  if (!(a > 0.0 && a < 0.5) || !(b > -1.0) || !(c < 0.0)) return Admissibility::kInadmissible;
  if (std::abs(b + 2.0 * a) <= kTol) return Admissibility::kMarginal;
  return b < -2.0 * a ? Admissibility::kAdmissible : Admissibility::kInadmissible;
}

StepSchedules StepSchedules::sensor_network() {
  return {PowerLaw{0.2, 0.3, 2.0}, PowerLaw{15.0, -0.6, 0.0}, PowerLaw{0.2, -0.25, 0.0}};
}

double RunMetrics::worst_regret_avg(std::size_t t) const {
  double w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < agents; ++i) w = std::max(w, regret_avg(t, i));
  return w;
}

Vector RunMetrics::average_state(std::size_t t) const {
  Vector avg(dimension, 0.0);
  for (const auto& x : states[t - 1]) {
    for (std::size_t k = 0; k < dimension; ++k) avg[k] += x[k];
  }
  for (double& v : avg) v /= static_cast<double>(agents);
  return avg;
}

double RunMetrics::initial_norm() const {
  double s = 0.0;
  for (const auto& x : states.front()) s += dot(x, x);
  return std::sqrt(s);
}

namespace {

double consensus_error(const std::vector<Vector>& x) {
  const std::size_t m = x.front().size();
  Vector avg(m, 0.0);
  for (const auto& xi : x) {
    for (std::size_t k = 0; k < m; ++k) avg[k] += xi[k];
  }
  for (double& v : avg) v /= static_cast<double>(x.size());
  double worst = 0.0;
  for (const auto& xi : x) worst = std::max(worst, distance(xi, avg));
  return worst;
}

void validate(const RunConfig& cfg, const problems::OnlineProblem& problem) {
  const std::size_t n = problem.agents();
  if (cfg.graph.agents() != n) {
    throw ConfigError(fmt::format("graph has {} agents but the problem has {}", cfg.graph.agents(), n));
  }
  if (problem.horizon() < cfg.horizon) {
    throw ConfigError(fmt::format("problem horizon {} is shorter than the run horizon {}", problem.horizon(), cfg.horizon));
  }
  if (cfg.graph.mode() == graph::ScheduleMode::kExplicit && cfg.graph.period() < cfg.horizon) {
    throw ConfigError(fmt::format("explicit graph schedule has {} matrices, the run needs {}", cfg.graph.period(),
                                  cfg.horizon));
  }
  for (std::size_t k = 0; k < cfg.graph.period(); ++k) {
    const auto v = graph::validate_weight_matrix(cfg.graph.matrices()[k]);
    if (!v.empty()) throw ConfigError(fmt::format("graph matrix {}: {}", k, v.front().message));
  }
  const auto conn = graph::check_uniform_connectivity(cfg.graph);
  if (!conn.connected) {
    throw ConfigError(fmt::format("graph schedule is not uniformly strongly connected (window {} fails with U = {})",
                                  *conn.first_failing_window, cfg.graph.window()));
  }
  if (cfg.initial_states) {
    if (cfg.initial_states->size() != n) throw ConfigError("initial states: wrong agent count");
    for (const auto& x : *cfg.initial_states) {
      if (!problem.constraint().contains(x, 1e-9)) throw ConfigError("initial states must lie in the constraint set");
    }
  }
  if (cfg.mirror.kind() == mirror::MirrorMap::Kind::kNegativeEntropy &&
      problem.constraint().kind() != problems::ConstraintSet::Kind::kSimplex) {
    throw ConfigError("negative-entropy mirror map needs a simplex constraint");
  }
}

}  // namespace

RunMetrics run(const RunConfig& cfg) {
  if (!cfg.problem) throw ConfigError("run config has no problem");
  if (cfg.horizon == 0) throw ConfigError("run horizon must be positive");
  const auto problem = cfg.problem(cfg.seed, cfg.horizon);
  validate(cfg, *problem);

  const std::size_t n = problem->agents();
  const std::size_t m = problem->dimension();
  const std::size_t T = cfg.horizon;
  const auto& omega = problem->constraint();

  RunMetrics out;
  out.agents = n;
  out.dimension = m;
  out.horizon = T;
  out.gradient_bound = cfg.gradient_bound.value_or(problem->bounds().G);

  // schedule checks
  const auto adm = cfg.schedules.admissibility();
  if (adm == Admissibility::kInadmissible) {
    if (!cfg.allow_violations) {
      throw ScheduleViolation(fmt::format("schedule exponents (a={}, b={}, c={}) are outside the admissible region",
                                          cfg.schedules.alpha.power, cfg.schedules.beta.power, cfg.schedules.gamma.power),
                              0);
    }
    out.warnings.push_back("schedule exponents are outside the admissible region");
  } else if (adm == Admissibility::kMarginal) {
    out.warnings.push_back(fmt::format("schedule exponents are marginal: b = -2a ({} = -2 * {})",
                                       cfg.schedules.beta.power, cfg.schedules.alpha.power));
  }
  out.alpha.resize(T);
  out.beta.resize(T);
  std::size_t first_alpha_violation = 0, alpha_violations = 0, large_beta = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    out.alpha[t - 1] = cfg.schedules.alpha(t);
    out.beta[t - 1] = cfg.schedules.beta(t);
    if (!(out.alpha[t - 1] > 0.0) || !(out.beta[t - 1] > 0.0) || !(cfg.schedules.gamma(t) > 0.0)) {
      throw ConfigError(fmt::format("schedules must be positive (round {})", t));
    }
    if (out.alpha[t - 1] < 2.0 * out.gradient_bound) {
      if (alpha_violations++ == 0) first_alpha_violation = t;
    }
    if (out.beta[t - 1] >= 1.0) ++large_beta;
    if (t > 1 && out.beta[t - 1] > out.beta[t - 2]) {
      throw ConfigError(fmt::format("step size must be non-increasing (beta grows at round {})", t));
    }
  }
  if (alpha_violations > 0) {
    const auto msg = fmt::format("alpha_t < 2G = {:.6g} at {} rounds, first at t = {} (alpha = {:.6g})",
                                 2.0 * out.gradient_bound, alpha_violations, first_alpha_violation,
                                 out.alpha[first_alpha_violation - 1]);
    if (!cfg.allow_violations) throw ScheduleViolation(msg, first_alpha_violation);
    out.warnings.push_back(msg);
  }
  if (large_beta > 0) out.warnings.push_back(fmt::format("beta_t >= 1 at {} rounds", large_beta));

  // initial states
  std::vector<Vector> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = cfg.initial_states ? (*cfg.initial_states)[i] : omega.spread_point(i, n);
  }

  out.regret.assign(T, std::vector<double>(n, 0.0));
  out.clip_active.assign(T, std::vector<char>(n, 0));
  out.clip_rate.assign(T, 0.0);
  out.states.reserve(T + 1);
  out.consensus_error.reserve(T + 1);
  out.benchmark.points.reserve(T);
  out.states.push_back(x);
  out.consensus_error.push_back(consensus_error(x));

  const estimator::EstimateOptions est_opts{cfg.per_coordinate_r};
  std::vector<double> cumulative(n, 0.0);
  std::vector<Vector> grads(n);
  for (std::size_t t = 1; t <= T; ++t) {
    const Vector xstar = problem->minimizer(t);
    out.benchmark.points.push_back(xstar);
    const double fstar = problem->global_objective(t, xstar);
    for (std::size_t i = 0; i < n; ++i) {
      cumulative[i] += problem->global_objective(t, x[i]) - fstar;
      out.regret[t - 1][i] = cumulative[i];
      if (!std::isfinite(cumulative[i])) {
        throw NumericError(fmt::format("non-finite regret at round {}, agent {}", t, i + 1));
      }
    }

    const double alpha = out.alpha[t - 1];
    const double gamma = cfg.schedules.gamma(t);
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Stream rng(cfg.seed, i, t, StreamPurpose::kEstimator);
      auto rec = estimator::estimate_and_clip(*problem, i, t, x[i], gamma, alpha, cfg.kernel, cfg.oracle_noise, rng,
                                              est_opts);
      if (!all_finite(rec.raw)) {
        throw NumericError(fmt::format("non-finite gradient estimate at round {}, agent {}", t, i + 1));
      }
      out.oracle_calls += rec.oracle_calls;
      out.clip_active[t - 1][i] = rec.clip_active ? 1 : 0;
      clipped += rec.clip_active ? 1 : 0;
      grads[i] = std::move(rec.clipped);
    }
    out.clip_rate[t - 1] = static_cast<double>(clipped) / static_cast<double>(n);

    const auto y = graph::mix(cfg.graph, t, x);
    const double beta = out.beta[t - 1];
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = mirror::md_step(cfg.mirror, {y[i], grads[i], beta, &omega});
      if (!all_finite(x[i])) throw NumericError(fmt::format("non-finite state at round {}, agent {}", t + 1, i + 1));
    }
    out.states.push_back(x);
    out.consensus_error.push_back(consensus_error(x));
  }

  out.benchmark.variation = problems::path_variation(out.benchmark.points);
  out.variation_cum.assign(T, 0.0);
  for (std::size_t t = 2; t <= T; ++t) {
    out.variation_cum[t - 1] =
        out.variation_cum[t - 2] + distance(out.benchmark.points[t - 1], out.benchmark.points[t - 2]);
  }
  return out;
}

std::vector<std::size_t> checkpoints(std::size_t horizon) {
  std::vector<std::size_t> c;
  for (int shift = 6; shift >= 0; --shift) {
    const std::size_t v = horizon >> shift;
    if (v == 0 || (!c.empty() && c.back() == v)) continue;
    c.push_back(v);
  }
  return c;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileTable multi_seed(const RunConfig& config, const std::vector<std::uint64_t>& seeds, unsigned threads,
                         const std::function<void(std::size_t, const RunMetrics&)>& on_run) {
  if (seeds.size() < 10) throw ParameterError(fmt::format("multi_seed needs at least 10 seeds, got {}", seeds.size()));
  QuantileTable table;
  table.seeds = seeds;
  table.checkpoints = checkpoints(config.horizon);
  table.worst.assign(seeds.size(), std::vector<double>(table.checkpoints.size(), 0.0));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t s = next++; s < seeds.size(); s = next++) {
      try {
        RunConfig cfg = config;
        cfg.seed = seeds[s];
        const auto metrics = run(cfg);
        for (std::size_t c = 0; c < table.checkpoints.size(); ++c) {
          table.worst[s][c] = metrics.worst_regret_avg(table.checkpoints[c]);
        }
        if (on_run) on_run(s, metrics);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  table.value.assign(table.checkpoints.size(), std::vector<double>(table.deltas.size(), 0.0));
  for (std::size_t c = 0; c < table.checkpoints.size(); ++c) {
    std::vector<double> column(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) column[s] = table.worst[s][c];
    for (std::size_t d = 0; d < table.deltas.size(); ++d) {
      table.value[c][d] = empirical_quantile(column, 1.0 - table.deltas[d]);
    }
  }
  return table;
}

std::vector<double> consensus_envelope(const graph::MixingConstants& mixing, std::size_t agents, std::size_t dimension,
                                       double initial_norm, double mu, const std::vector<double>& alpha,
                                       const std::vector<double>& beta) {
  const double root = std::sqrt(static_cast<double>(agents * dimension));
  const double theta1 = root * mixing.C * initial_norm / mixing.lambda;
  const double theta2 = root * mixing.C / (mu * mixing.lambda);
  std::vector<double> env(alpha.size());
  double driven = 0.0;  // sum_{s<=t} alpha_s beta_s lambda^(t-s)
  double decay = 1.0;   // lambda^t
  for (std::size_t t = 1; t <= alpha.size(); ++t) {
    driven = mixing.lambda * driven + alpha[t - 1] * beta[t - 1];
    decay *= mixing.lambda;
    env[t - 1] = theta1 * decay + theta2 * driven;
  }
  return env;
}

std::vector<EnvelopeRow> consensus_envelope_check(const RunMetrics& metrics, const graph::MixingConstants& mixing,
                                                  double mu) {
  const auto env = consensus_envelope(mixing, metrics.agents, metrics.dimension, metrics.initial_norm(), mu,
                                      metrics.alpha, metrics.beta);
  std::vector<EnvelopeRow> rows(metrics.horizon);
  for (std::size_t t = 1; t <= metrics.horizon; ++t) rows[t - 1] = {t, metrics.consensus_error[t], env[t - 1]};
  return rows;
}

}  // namespace zomd::engine
