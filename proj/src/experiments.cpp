// SPDX-License-Identifier: Apache-2.0
#include "zomd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "zomd/io.hpp"
#include "zomd/kernels.hpp"
#include "zomd/mirror.hpp"

namespace zomd::experiments {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ParameterError("correlation needs two equally long series");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool strictly_decreasing(const std::vector<double>& series) {
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!(series[k] < series[k - 1])) return false;
  }
  return true;
}

engine::RunConfig sensor_network_config(std::uint64_t seed, std::size_t horizon) {
  return engine::RunConfig{
      .problem = [](std::uint64_t s, std::size_t T) -> problems::ProblemPtr {
        return problems::sensor_network_problem(s, T);
      },
      .graph = graph::fig1_schedule(),
      .kernel = kernels::example_kernel(),
      .mirror = mirror::MirrorMap::euclidean(),
      .schedules = engine::StepSchedules::sensor_network(),
      .horizon = horizon,
      .seed = seed,
      .allow_violations = true,
      .gradient_bound = std::nullopt,
      .initial_states = std::nullopt,
  };
}

namespace {

std::vector<std::size_t> late_checkpoints(std::size_t T) { return {T >> 3, T >> 2, T >> 1, T}; }

SeedSummary summarize(std::uint64_t seed, const engine::RunMetrics& m, const std::vector<double>& z,
                      const graph::MixingConstants& mixing) {
  SeedSummary s{seed, 0.0, false, false, false};
  const std::size_t T = m.horizon;
  std::vector<double> zs, xs;
  for (std::size_t t = T / 2; t <= T; ++t) {
    zs.push_back(z[t - 1]);
    xs.push_back(m.average_state(t)[0]);
  }
  s.tracking_correlation = correlation(zs, xs);
  const auto cps = late_checkpoints(T);
  std::vector<double> worst;
  for (auto c : cps) worst.push_back(m.worst_regret_avg(c));
  s.worst_agent_decreasing = strictly_decreasing(worst);
  s.every_agent_decreasing = true;
  for (std::size_t i = 0; i < m.agents; ++i) {
    std::vector<double> series;
    for (auto c : cps) series.push_back(m.regret_avg(c, i));
    s.every_agent_decreasing = s.every_agent_decreasing && strictly_decreasing(series);
  }
  const auto rows = engine::consensus_envelope_check(m, mixing);
  s.envelope_holds = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass(); });
  return s;
}

}  // namespace

ReproduceResult reproduce_paper(const ReproduceOptions& options) {
  if (options.horizon < 16) throw ParameterError("reproduce-paper needs a horizon of at least 16 rounds");
  auto cfg = sensor_network_config(options.seed, options.horizon);
  if (options.oracle_noise) cfg.oracle_noise = *options.oracle_noise;
  const auto z = problems::target_trajectory(options.horizon, 0.0);
  const auto sched = graph::fig1_schedule();
  const auto mixing = graph::mixing_constants(sched.agents(), sched.window(), sched.l_bound());

  ReproduceResult res;
  res.traced = engine::run(cfg);
  res.warnings = res.traced.warnings;
  res.late_checkpoints = late_checkpoints(options.horizon);
  {
    const auto rows = engine::consensus_envelope_check(res.traced, mixing);
    res.envelope_holds = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass(); });
  }

  std::vector<std::uint64_t> seeds(options.seeds);
  std::iota(seeds.begin(), seeds.end(), options.seed);
  res.per_seed.resize(seeds.size());
  res.quantiles = engine::multi_seed(cfg, seeds, options.threads, [&](std::size_t s, const engine::RunMetrics& m) {
    res.per_seed[s] = summarize(seeds[s], m, z, mixing);
  });

  std::size_t decreasing = 0;
  res.min_correlation = 1.0;
  for (const auto& s : res.per_seed) {
    decreasing += s.worst_agent_decreasing ? 1 : 0;
    res.min_correlation = std::min(res.min_correlation, s.tracking_correlation);
    res.envelope_holds = res.envelope_holds && s.envelope_holds;
  }
  res.decreasing_fraction = static_cast<double>(decreasing) / static_cast<double>(res.per_seed.size());

  // 0.95 quantile (delta = 0.05) along the late checkpoints
  const auto& q = res.quantiles;
  const auto delta_col = static_cast<std::size_t>(
      std::find(q.deltas.begin(), q.deltas.end(), 0.05) - q.deltas.begin());
  std::vector<double> curve;
  for (auto c : res.late_checkpoints) {
    const auto it = std::find(q.checkpoints.begin(), q.checkpoints.end(), c);
    curve.push_back(q.value[static_cast<std::size_t>(it - q.checkpoints.begin())][delta_col]);
  }
  res.quantile_curve_decreasing = strictly_decreasing(curve);
  return res;
}

void write_reproduction(const ReproduceResult& result, const ReproduceOptions& options,
                        const std::filesystem::path& dir) {
  const auto& m = result.traced;
  const auto z = problems::target_trajectory(m.horizon, 0.0);
  io::write_file(dir / "trajectory.csv", [&](std::ostream& os) {
    os << "t,z,mean_x\n";
    for (std::size_t t = 1; t <= m.horizon; ++t) {
      os << t << ',' << io::format_double(z[t - 1]) << ',' << io::format_double(m.average_state(t)[0]) << '\n';
    }
  });
  io::write_file(dir / "regret_over_t.csv", [&](std::ostream& os) {
    os << 't';
    for (std::size_t i = 1; i <= m.agents; ++i) os << ",agent_" << i;
    os << '\n';
    for (std::size_t t = 1; t <= m.horizon; ++t) {
      os << t;
      for (std::size_t i = 0; i < m.agents; ++i) os << ',' << io::format_double(m.regret_avg(t, i));
      os << '\n';
    }
  });
  io::write_file(dir / "metrics.csv", [&](std::ostream& os) { io::write_metrics_csv(os, m); });
  io::write_file(dir / "benchmark.csv", [&](std::ostream& os) { io::write_benchmark_csv(os, m); });
  io::write_file(dir / "quantiles.csv", [&](std::ostream& os) { io::write_quantiles_csv(os, result.quantiles); });
  const auto problem = problems::sensor_network_problem(options.seed, options.horizon);
  io::write_file(dir / "noise.csv", [&](std::ostream& os) { problem->write_noise_csv(os); });
}

std::string format_reproduction(const ReproduceResult& r) {
  std::string out;
  out += fmt::format("horizon {}, {} seeds\n", r.traced.horizon, r.per_seed.size());
  for (const auto& w : r.warnings) out += fmt::format("warning: {}\n", w);
  out += "seed  corr(z, mean x)  worst-agent R/t decreasing  envelope\n";
  for (const auto& s : r.per_seed) {
    out += fmt::format("{:>4}  {:>15.4f}  {:>26}  {:>8}\n", s.seed, s.tracking_correlation,
                       s.worst_agent_decreasing ? "yes" : "no", s.envelope_holds ? "holds" : "FAILS");
  }
  out += fmt::format("decreasing fraction {:.2f} (need >= 0.95); 0.95-quantile curve {}\n", r.decreasing_fraction,
                     r.quantile_curve_decreasing ? "decreasing" : "NOT decreasing");
  out += fmt::format("min tracking correlation {:.4f}; consensus envelope {}\n", r.min_correlation,
                     r.envelope_holds ? "holds" : "FAILS");
  out += r.sublinear() ? "sublinear regret: PASS\n" : "sublinear regret: FAIL\n";
  return out;
}

GraphReport check_graph(const graph::GraphSchedule& schedule, std::optional<double> l) {
  GraphReport rep;
  rep.text += fmt::format("{} agents, {} matrices, mode {}, U = {}\n", schedule.agents(), schedule.period(),
                          schedule.mode() == graph::ScheduleMode::kCyclic ? "cyclic" : "explicit", schedule.window());
  for (std::size_t k = 0; k < schedule.period(); ++k) {
    const auto v = graph::validate_weight_matrix(schedule.matrices()[k]);
    if (v.empty()) {
      rep.text += fmt::format("matrix {}: ok\n", k);
      continue;
    }
    rep.ok = false;
    for (const auto& viol : v) rep.text += fmt::format("matrix {}: {}\n", k, viol.message);
  }
  const auto conn = graph::check_uniform_connectivity(schedule);
  if (conn.connected) {
    rep.text += "uniformly strongly connected: yes\n";
  } else {
    rep.ok = false;
    rep.text += fmt::format("uniformly strongly connected: NO (first failing window starts at {})\n",
                            *conn.first_failing_window);
  }
  const double lb = l.value_or(schedule.l_bound());
  if (schedule.agents() >= 2 && lb < 1.0) {
    const auto mc = graph::mixing_constants(schedule.agents(), schedule.window(), lb);
    rep.text += fmt::format("mixing constants (l = {}): C = {:.17g}, lambda = {:.17g}\n", lb, mc.C, mc.lambda);
  }
  rep.text += rep.ok ? "PASS\n" : "FAIL\n";
  return rep;
}

problems::ProblemPtr power_function_problem(unsigned power, std::size_t dimension) {
  if (power == 0) throw ParameterError("power must be positive");
  const double p = static_cast<double>(power);
  auto f = [p](std::size_t, std::size_t, std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::pow(v, p);
    return s;
  };
  auto g = [p](std::size_t, std::size_t, std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = p * std::pow(x[k], p - 1.0);
    return out;
  };
  return std::make_shared<problems::FunctionProblem>(1, dimension, 1,
                                                     problems::ConstraintSet::box(dimension, -10.0, 10.0),
                                                     problems::Bounds{}, f, g);
}

}  // namespace zomd::experiments
