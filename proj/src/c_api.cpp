// SPDX-License-Identifier: Apache-2.0
#include "zomd/zomd.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zomd/config.hpp"
#include "zomd/engine.hpp"
#include "zomd/estimator.hpp"
#include "zomd/experiments.hpp"
#include "zomd/io.hpp"
#include "zomd/kernels.hpp"

struct zomd_config_s {
  zomd::config::Loaded loaded;
};

struct zomd_metrics_s {
  zomd::engine::RunMetrics metrics;
};

struct zomd_quantiles_s {
  zomd::engine::QuantileTable table;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_round = 0;

zomd_status fail(zomd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
zomd_status guarded(F&& body) {
  g_last_error.clear();
  g_last_round = 0;
  try {
    return body();
  } catch (const zomd::ScheduleViolation& e) {
    g_last_round = e.round();
    return fail(ZOMD_ERR_SCHEDULE, e.what());
  } catch (const zomd::ConfigError& e) {
    return fail(ZOMD_ERR_CONFIG, e.what());
  } catch (const zomd::ParameterError& e) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const zomd::DomainError& e) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ZOMD_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(ZOMD_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(ZOMD_ERR_RUNTIME, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> collect(const char* const* overrides, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (overrides[k] == nullptr) throw zomd::ParameterError("null override string");
    out.emplace_back(overrides[k]);
  }
  return out;
}

zomd::graph::MixingConstants mixing_of(const zomd::engine::RunConfig& run) {
  const auto& g = run.graph;
  return zomd::graph::mixing_constants(g.agents(), g.window(), g.l_bound());
}

}  // namespace

extern "C" {

const char* zomd_version(void) { return "0.1.0"; }
const char* zomd_last_error(void) { return g_last_error.c_str(); }
size_t zomd_last_error_round(void) { return g_last_round; }
void zomd_string_free(char* s) { delete[] s; }

zomd_status zomd_config_parse(const char* json_text, const char* const* overrides, size_t n_overrides,
                              zomd_config* out) {
  if (json_text == nullptr || out == nullptr || (n_overrides > 0 && overrides == nullptr)) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    *out = new zomd_config_s{zomd::config::load(json_text, collect(overrides, n_overrides))};
    return ZOMD_OK;
  });
}

zomd_status zomd_config_load(const char* path, const char* const* overrides, size_t n_overrides, zomd_config* out) {
  if (path == nullptr || out == nullptr || (n_overrides > 0 && overrides == nullptr)) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  }
  std::ifstream in(path);
  if (!in) return fail(ZOMD_ERR_CONFIG, std::string("cannot open config file ") + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return zomd_config_parse(buf.str().c_str(), overrides, n_overrides, out);
}

zomd_status zomd_config_set_seed(zomd_config config, uint64_t seed) {
  if (config == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null config");
  config->loaded.run.seed = seed;
  config->loaded.resolved["run"]["seed"] = seed;
  return ZOMD_OK;
}

zomd_status zomd_config_resolved_json(zomd_config config, char** out_json) {
  if (config == nullptr || out_json == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out_json = duplicate(config->loaded.resolved.dump(2));
    return ZOMD_OK;
  });
}

unsigned zomd_config_threads(zomd_config config) { return config == nullptr ? 1u : config->loaded.threads; }

void zomd_config_free(zomd_config config) { delete config; }

zomd_status zomd_run(zomd_config config, zomd_metrics* out) {
  if (config == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new zomd_metrics_s{zomd::engine::run(config->loaded.run)};
    return ZOMD_OK;
  });
}

size_t zomd_metrics_horizon(zomd_metrics m) { return m == nullptr ? 0 : m->metrics.horizon; }
size_t zomd_metrics_agents(zomd_metrics m) { return m == nullptr ? 0 : m->metrics.agents; }
size_t zomd_metrics_dimension(zomd_metrics m) { return m == nullptr ? 0 : m->metrics.dimension; }

zomd_status zomd_metrics_regret(zomd_metrics m, size_t t, size_t agent, double* out) {
  if (m == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  if (t < 1 || t > m->metrics.horizon || agent >= m->metrics.agents) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "round or agent out of range");
  }
  *out = m->metrics.regret[t - 1][agent];
  return ZOMD_OK;
}

zomd_status zomd_metrics_consensus_error(zomd_metrics m, size_t t, double* out) {
  if (m == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  if (t < 1 || t > m->metrics.consensus_error.size()) return fail(ZOMD_ERR_INVALID_ARGUMENT, "round out of range");
  *out = m->metrics.consensus_error[t - 1];
  return ZOMD_OK;
}

zomd_status zomd_metrics_state(zomd_metrics m, size_t t, size_t agent, double* out, size_t capacity) {
  if (m == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  if (t < 1 || t > m->metrics.states.size() || agent >= m->metrics.agents) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "round or agent out of range");
  }
  if (capacity < m->metrics.dimension) return fail(ZOMD_ERR_INVALID_ARGUMENT, "output buffer too small");
  const auto& x = m->metrics.states[t - 1][agent];
  std::copy(x.begin(), x.end(), out);
  return ZOMD_OK;
}

double zomd_metrics_path_variation(zomd_metrics m) { return m == nullptr ? 0.0 : m->metrics.benchmark.variation; }
size_t zomd_metrics_oracle_calls(zomd_metrics m) { return m == nullptr ? 0 : m->metrics.oracle_calls; }
size_t zomd_metrics_warning_count(zomd_metrics m) { return m == nullptr ? 0 : m->metrics.warnings.size(); }

const char* zomd_metrics_warning(zomd_metrics m, size_t index) {
  if (m == nullptr || index >= m->metrics.warnings.size()) return nullptr;
  return m->metrics.warnings[index].c_str();
}

zomd_status zomd_metrics_write_csv(zomd_metrics m, const char* dir) {
  if (m == nullptr || dir == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const std::filesystem::path d(dir);
    zomd::io::write_file(d / "metrics.csv", [&](std::ostream& os) { zomd::io::write_metrics_csv(os, m->metrics); });
    zomd::io::write_file(d / "benchmark.csv", [&](std::ostream& os) { zomd::io::write_benchmark_csv(os, m->metrics); });
  } catch (const std::exception& e) {
    return fail(ZOMD_ERR_IO, e.what());
  }
  return ZOMD_OK;
}

zomd_status zomd_consensus_envelope_check(zomd_config config, zomd_metrics m, size_t* failing_rounds) {
  if (config == nullptr || m == nullptr || failing_rounds == nullptr) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const auto rows = zomd::engine::consensus_envelope_check(m->metrics, mixing_of(config->loaded.run),
                                                             config->loaded.run.mirror.mu());
    std::size_t bad = 0;
    for (const auto& r : rows) bad += r.pass() ? 0 : 1;
    *failing_rounds = bad;
    return bad == 0 ? ZOMD_OK : fail(ZOMD_ERR_CHECK_FAILED, std::to_string(bad) + " rounds exceed the envelope");
  });
}

void zomd_metrics_free(zomd_metrics m) { delete m; }

zomd_status zomd_multi_seed(zomd_config config, const uint64_t* seeds, size_t n_seeds, unsigned threads,
                            zomd_quantiles* out) {
  if (config == nullptr || seeds == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::vector<std::uint64_t> list(seeds, seeds + n_seeds);
    *out = new zomd_quantiles_s{zomd::engine::multi_seed(config->loaded.run, list, threads)};
    return ZOMD_OK;
  });
}

size_t zomd_quantiles_checkpoint_count(zomd_quantiles q) { return q == nullptr ? 0 : q->table.checkpoints.size(); }

size_t zomd_quantiles_checkpoint(zomd_quantiles q, size_t index) {
  if (q == nullptr || index >= q->table.checkpoints.size()) return 0;
  return q->table.checkpoints[index];
}

size_t zomd_quantiles_delta_count(zomd_quantiles q) { return q == nullptr ? 0 : q->table.deltas.size(); }

double zomd_quantiles_delta(zomd_quantiles q, size_t index) {
  if (q == nullptr || index >= q->table.deltas.size()) return 0.0;
  return q->table.deltas[index];
}

zomd_status zomd_quantiles_value(zomd_quantiles q, size_t checkpoint_index, size_t delta_index, double* out) {
  if (q == nullptr || out == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  if (checkpoint_index >= q->table.checkpoints.size() || delta_index >= q->table.deltas.size()) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "index out of range");
  }
  *out = q->table.value[checkpoint_index][delta_index];
  return ZOMD_OK;
}

zomd_status zomd_quantiles_write_csv(zomd_quantiles q, const char* path) {
  if (q == nullptr || path == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  try {
    zomd::io::write_file(path, [&](std::ostream& os) { zomd::io::write_quantiles_csv(os, q->table); });
  } catch (const std::exception& e) {
    return fail(ZOMD_ERR_IO, e.what());
  }
  return ZOMD_OK;
}

void zomd_quantiles_free(zomd_quantiles q) { delete q; }

zomd_status zomd_check_kernel(const char* kernel_spec, size_t order, double eps, char** report) {
  if (kernel_spec == nullptr || report == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  *report = nullptr;
  return guarded([&] {
    std::optional<std::size_t> ord;
    if (order > 0) ord = order;
    const auto k = zomd::kernels::from_spec(kernel_spec, ord);
    const auto rep = zomd::kernels::check_moments(k, eps);
    *report = duplicate(zomd::kernels::format_report(k, rep));
    return rep.passed() ? ZOMD_OK : fail(ZOMD_ERR_CHECK_FAILED, "kernel moment conditions violated");
  });
}

zomd_status zomd_check_graph(zomd_config config, char** report) {
  if (config == nullptr || report == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  *report = nullptr;
  return guarded([&] {
    std::optional<double> l;
    const auto& g = config->loaded.resolved["graph"];
    if (g.contains("l") && g["l"].is_number()) l = g["l"].get<double>();
    const auto rep = zomd::experiments::check_graph(config->loaded.run.graph, l);
    *report = duplicate(rep.text);
    return rep.ok ? ZOMD_OK : fail(ZOMD_ERR_CHECK_FAILED, "graph schedule violates its assumptions");
  });
}

zomd_status zomd_bias_sweep(const zomd_bias_sweep_options* o, char** csv) {
  if (o == nullptr || csv == nullptr || (o->n_gammas > 0 && o->gammas == nullptr)) {
    return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  }
  *csv = nullptr;
  return guarded([&] {
    if (o->dimension == 0 || o->n_gammas == 0 || o->samples < 2) {
      throw zomd::ParameterError("bias sweep needs dimension >= 1, at least one gamma and samples >= 2");
    }
    const auto problem = zomd::experiments::power_function_problem(o->power, o->dimension);
    const auto kernel = zomd::kernels::from_spec(o->kernel != nullptr ? o->kernel : "example");
    const auto noise = zomd::problems::NoiseModel::from_spec(o->noise != nullptr ? o->noise : "none");
    const zomd::Vector point(o->dimension, o->point);
    const std::vector<double> gammas(o->gammas, o->gammas + o->n_gammas);
    zomd::Stream rng(o->seed, 0, 0, zomd::StreamPurpose::kHarness);
    const auto rows = zomd::estimator::measure_bias(*problem, 0, 1, point, gammas, kernel, noise, o->samples, rng);
    std::ostringstream os;
    zomd::io::write_bias_csv(os, rows);
    *csv = duplicate(os.str());
    return ZOMD_OK;
  });
}

zomd_status zomd_reproduce_paper(const char* out_dir, uint64_t seed, size_t n_seeds, size_t horizon, unsigned threads,
                                 char** report) {
  if (out_dir == nullptr || report == nullptr) return fail(ZOMD_ERR_INVALID_ARGUMENT, "null argument");
  *report = nullptr;
  return guarded([&] {
    zomd::experiments::ReproduceOptions opts;
    opts.seed = seed;
    opts.seeds = n_seeds;
    opts.horizon = horizon;
    opts.threads = threads;
    const auto result = zomd::experiments::reproduce_paper(opts);
    try {
      zomd::experiments::write_reproduction(result, opts, out_dir);
    } catch (const std::exception& e) {
      return fail(ZOMD_ERR_IO, e.what());
    }
    *report = duplicate(zomd::experiments::format_reproduction(result));
    return result.sublinear() ? ZOMD_OK : fail(ZOMD_ERR_CHECK_FAILED, "regret is not sublinear");
  });
}

}  // extern "C"
