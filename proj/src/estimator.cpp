// SPDX-License-Identifier: Apache-2.0
#include "zomd/estimator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace zomd::estimator {

Estimate zo_estimate(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t, std::span<const double> x,
                     double gamma, const kernels::Kernel& kernel, const problems::NoiseModel& noise, Stream& rng,
                     const EstimateOptions& options) {
  if (!(gamma > 0.0)) throw ParameterError(fmt::format("estimation radius gamma must be positive, got {}", gamma));
  if (x.size() != problem.dimension()) {
    throw ParameterError(fmt::format("point has dimension {}, problem has {}", x.size(), problem.dimension()));
  }
  const std::size_t m = x.size();
  Estimate est;
  est.raw.assign(m, 0.0);
  Vector probe(x.begin(), x.end());
  double r = rng.uniform(-1.0, 1.0);
  for (std::size_t l = 0; l < m; ++l) {
    if (options.per_coordinate_r && l > 0) r = rng.uniform(-1.0, 1.0);
    const double step = gamma * r;
    probe[l] = x[l] + step;
    const double up = problem.objective(agent, t, probe);
    probe[l] = x[l] - step;
    const double down = problem.objective(agent, t, probe);
    probe[l] = x[l];
    est.oracle_calls += 2;
    const double xi = noise.sample(rng);
    est.raw[l] = ((up - down) / (2.0 * gamma) + xi) * kernel(r);
  }
  return est;
}

Vector clip(std::span<const double> raw, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError(fmt::format("clipping radius must be positive, got {}", alpha));
  Vector out(raw.begin(), raw.end());
  const double nrm = norm(raw);
  if (nrm > alpha) {
    const double s = alpha / nrm;
    for (double& v : out) v *= s;
  }
  return out;
}

EstimateRecord estimate_and_clip(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t,
                                 std::span<const double> x, double gamma, double alpha, const kernels::Kernel& kernel,
                                 const problems::NoiseModel& noise, Stream& rng, const EstimateOptions& options) {
  auto est = zo_estimate(problem, agent, t, x, gamma, kernel, noise, rng, options);
  EstimateRecord rec;
  rec.clip_active = norm(est.raw) > alpha;
  rec.clipped = clip(est.raw, alpha);
  rec.raw = std::move(est.raw);
  rec.oracle_calls = est.oracle_calls;
  return rec;
}

double BiasRow::max_stderr() const {
  double s = 0.0;
  for (double v : stderr_) s = std::max(s, v);
  return s;
}

std::vector<BiasRow> measure_bias(const problems::OnlineProblem& problem, std::size_t agent, std::size_t t,
                                  std::span<const double> point, const std::vector<double>& gammas,
                                  const kernels::Kernel& kernel, const problems::NoiseModel& noise, std::size_t samples,
                                  Stream& rng, const EstimateOptions& options) {
  if (samples < 2) throw ParameterError("measure_bias needs at least two samples");
  auto grad = problem.gradient(agent, t, point);
  if (!grad) throw ParameterError("measure_bias needs a problem with an analytic gradient");
  const std::size_t m = point.size();
  std::vector<BiasRow> rows;
  for (double gamma : gammas) {
    // Welford accumulation per coordinate
    Vector mean(m, 0.0), m2(m, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
      const auto est = zo_estimate(problem, agent, t, point, gamma, kernel, noise, rng, options);
      const double n = static_cast<double>(s + 1);
      for (std::size_t k = 0; k < m; ++k) {
        const double d = est.raw[k] - mean[k];
        mean[k] += d / n;
        m2[k] += d * (est.raw[k] - mean[k]);
      }
    }
    Vector se(m);
    const double ns = static_cast<double>(samples);
    for (std::size_t k = 0; k < m; ++k) se[k] = std::sqrt(m2[k] / (ns - 1.0) / ns);
    rows.push_back({gamma, std::move(mean), std::move(se), *grad});
  }
  return rows;
}

double log_log_slope(const std::vector<double>& gammas, const std::vector<double>& bias) {
  if (gammas.size() != bias.size() || gammas.size() < 2) throw ParameterError("log_log_slope needs >= 2 paired points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(gammas.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0) || !(bias[k] != 0.0)) throw ParameterError("log_log_slope needs positive radii and nonzero bias");
    const double lx = std::log(gammas[k]);
    const double ly = std::log(std::abs(bias[k]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace zomd::estimator
