// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zomd/zomd.h"

namespace {

// 0 ok, 1 runtime or failed check, 2 configuration or usage, 3 schedule violation.
int exit_code(zomd_status s) {
  switch (s) {
    case ZOMD_OK:
      return 0;
    case ZOMD_ERR_CONFIG:
    case ZOMD_ERR_INVALID_ARGUMENT:
      return 2;
    case ZOMD_ERR_SCHEDULE:
      return 3;
    default:
      return 1;
  }
}

int report_error(zomd_status s) {
  std::cerr << "error: " << zomd_last_error() << '\n';
  return exit_code(s);
}

// Prints a library string and releases it.
void emit(char* text, std::ostream& os = std::cout) {
  if (text == nullptr) return;
  os << text;
  zomd_string_free(text);
}

std::string default_out(const std::string& sub) {
  const char* env = std::getenv("ZOMD_OUT");
  const std::filesystem::path base = env != nullptr && *env != '\0' ? env : "out";
  return (base / sub).string();
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_config_args(CLI::App* cmd, ConfigArgs& a, bool required) {
  auto* opt = cmd->add_option("--config,-c", a.path, "JSON run configuration");
  if (required) opt->required();
  cmd->add_option("--set", a.overrides, "override section.key=value (repeatable)");
  cmd->add_option("--seed", a.seed, "run seed");
}

// Loads the config file, or a preset-free empty document when no path is given.
zomd_status load(const ConfigArgs& a, zomd_config* out) {
  std::vector<const char*> ov;
  for (const auto& s : a.overrides) ov.push_back(s.c_str());
  const zomd_status s = a.path.empty() ? zomd_config_parse("{}", ov.data(), ov.size(), out)
                                       : zomd_config_load(a.path.c_str(), ov.data(), ov.size(), out);
  if (s != ZOMD_OK) return s;
  if (a.seed) return zomd_config_set_seed(*out, *a.seed);
  return ZOMD_OK;
}

int cmd_run(const ConfigArgs& a, const std::string& out, bool dry_run, bool allow) {
  ConfigArgs args = a;
  if (allow) args.overrides.emplace_back("run.allow_violations=true");
  zomd_config cfg = nullptr;
  if (auto s = load(args, &cfg); s != ZOMD_OK) return report_error(s);
  int code = 0;
  if (dry_run) {
    char* json = nullptr;
    if (auto s = zomd_config_resolved_json(cfg, &json); s != ZOMD_OK) {
      code = report_error(s);
    } else {
      emit(json);
      std::cout << '\n';
    }
    zomd_config_free(cfg);
    return code;
  }
  zomd_metrics m = nullptr;
  if (auto s = zomd_run(cfg, &m); s != ZOMD_OK) {
    code = report_error(s);
  } else {
    for (std::size_t k = 0; k < zomd_metrics_warning_count(m); ++k) {
      std::cerr << "warning: " << zomd_metrics_warning(m, k) << '\n';
    }
    if (auto s = zomd_metrics_write_csv(m, out.c_str()); s != ZOMD_OK) {
      code = report_error(s);
    } else {
      const std::size_t T = zomd_metrics_horizon(m);
      double worst = 0.0;
      for (std::size_t i = 0; i < zomd_metrics_agents(m); ++i) {
        double r = 0.0;
        zomd_metrics_regret(m, T, i, &r);
        worst = i == 0 ? r : std::max(worst, r);
      }
      std::cout << "T = " << T << ", worst-agent regret/T = " << worst / static_cast<double>(T)
                << ", path variation = " << zomd_metrics_path_variation(m) << "\nwrote " << out << '\n';
    }
    zomd_metrics_free(m);
  }
  zomd_config_free(cfg);
  return code;
}

int cmd_quantiles(const ConfigArgs& a, const std::string& out, std::size_t n_seeds, std::optional<unsigned> threads) {
  zomd_config cfg = nullptr;
  if (auto s = load(a, &cfg); s != ZOMD_OK) return report_error(s);
  const std::uint64_t first = a.seed.value_or(1);
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < n_seeds; ++k) seeds.push_back(first + k);
  zomd_quantiles q = nullptr;
  int code = 0;
  const unsigned nt = threads.value_or(zomd_config_threads(cfg));
  if (auto s = zomd_multi_seed(cfg, seeds.data(), seeds.size(), nt, &q); s != ZOMD_OK) {
    code = report_error(s);
  } else {
    const std::string path = (std::filesystem::path(out) / "quantiles.csv").string();
    if (auto s = zomd_quantiles_write_csv(q, path.c_str()); s != ZOMD_OK) {
      code = report_error(s);
    } else {
      std::cout << "checkpoint";
      for (std::size_t d = 0; d < zomd_quantiles_delta_count(q); ++d) {
        std::cout << "  q(1-" << zomd_quantiles_delta(q, d) << ")";
      }
      std::cout << '\n';
      for (std::size_t c = 0; c < zomd_quantiles_checkpoint_count(q); ++c) {
        std::cout << zomd_quantiles_checkpoint(q, c);
        for (std::size_t d = 0; d < zomd_quantiles_delta_count(q); ++d) {
          double v = 0.0;
          zomd_quantiles_value(q, c, d, &v);
          std::cout << "  " << v;
        }
        std::cout << '\n';
      }
      std::cout << "wrote " << path << '\n';
    }
    zomd_quantiles_free(q);
  }
  zomd_config_free(cfg);
  return code;
}

int cmd_check_graph(const ConfigArgs& a) {
  zomd_config cfg = nullptr;
  if (auto s = load(a, &cfg); s != ZOMD_OK) return report_error(s);
  char* text = nullptr;
  const zomd_status s = zomd_check_graph(cfg, &text);
  emit(text);
  zomd_config_free(cfg);
  return s == ZOMD_OK ? 0 : report_error(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online distributed zeroth-order mirror descent simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", zomd_version());

  ConfigArgs run_args;
  std::string run_out;
  bool dry_run = false, allow = false;
  auto* run = app.add_subcommand("run", "execute a configured run and write metrics.csv and benchmark.csv");
  add_config_args(run, run_args, true);
  run->add_option("--out,-o", run_out, "output directory (default $ZOMD_OUT/run)");
  run->add_flag("--dry-run", dry_run, "validate and print the resolved config");
  run->add_flag("--allow-violations", allow, "continue when alpha_t < 2G or schedules are inadmissible");

  std::string rp_out;
  std::uint64_t rp_seed = 1;
  std::size_t rp_seeds = 20, rp_T = 5000;
  unsigned rp_threads = 1;
  auto* rp = app.add_subcommand("reproduce-paper", "sensor-network tracking experiment on the fig1 graph");
  rp->add_option("--out,-o", rp_out, "output directory (default $ZOMD_OUT/reproduce-paper)");
  rp->add_option("--seed", rp_seed, "seed of the traced run and first seed of the quantile pass");
  rp->add_option("--seeds", rp_seeds, "seeds in the quantile pass")->check(CLI::Range(10, 100000));
  rp->add_option("--T", rp_T, "horizon")->check(CLI::Range(16, 100000000));
  rp->add_option("--threads", rp_threads, "worker threads for the quantile pass")->check(CLI::Range(1, 1024));

  std::string kernel_spec = "example";
  double eps = 4.0;
  std::size_t order = 0;
  auto* ck = app.add_subcommand("check-kernel", "verify the moment conditions of a kernel");
  ck->add_option("--kernel,-k", kernel_spec, "example, legendre:<l> or coefficients c0,c1,...");
  ck->add_option("--eps", eps, "smoothness exponent eps >= 2");
  ck->add_option("--order", order, "order l (default from the kernel)");
  ck->add_option("--seed", order, "accepted for uniformity; the check is deterministic")->group("");

  unsigned power = 5;
  std::size_t dim = 1, samples = 100000;
  double point = 0.0;
  std::vector<double> gammas{0.4, 0.2, 0.1};
  std::uint64_t bs_seed = 1;
  std::string bs_kernel = "example", bs_noise = "none", bs_out;
  auto* bs = app.add_subcommand("bias-sweep", "Monte-Carlo bias of the estimator on f(x) = sum x_k^p");
  bs->add_option("--power", power, "exponent p")->check(CLI::Range(1u, 64u));
  bs->add_option("--dim", dim, "dimension m")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  bs->add_option("--point", point, "value of every coordinate of the query point");
  bs->add_option("--gammas", gammas, "estimation radii")->delimiter(',');
  bs->add_option("--samples", samples, "draws per gamma")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  bs->add_option("--seed", bs_seed, "seed");
  bs->add_option("--kernel", bs_kernel, "kernel spec");
  bs->add_option("--noise", bs_noise, "none, constant:c, gaussian:mean:sd or f:d1:d2");
  bs->add_option("--out,-o", bs_out, "CSV file (default stdout)");

  ConfigArgs graph_args;
  auto* cg = app.add_subcommand("check-graph", "validate the graph schedule of a config");
  add_config_args(cg, graph_args, false);

  ConfigArgs q_args;
  std::string q_out;
  std::size_t q_seeds = 20;
  std::optional<unsigned> q_threads;
  auto* qs = app.add_subcommand("quantiles", "multi-seed quantiles of worst-agent regret/t");
  add_config_args(qs, q_args, true);
  qs->add_option("--seeds", q_seeds, "number of seeds, starting at --seed")->check(CLI::Range(10, 100000));
  qs->add_option("--threads", q_threads, "worker threads")->check(CLI::Range(1, 1024));
  qs->add_option("--out,-o", q_out, "output directory (default $ZOMD_OUT/quantiles)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(run_args, run_out.empty() ? default_out("run") : run_out, dry_run, allow);
  if (*qs) return cmd_quantiles(q_args, q_out.empty() ? default_out("quantiles") : q_out, q_seeds, q_threads);
  if (*cg) return cmd_check_graph(graph_args);

  if (*ck) {
    char* text = nullptr;
    const zomd_status s = zomd_check_kernel(kernel_spec.c_str(), order, eps, &text);
    emit(text);
    return s == ZOMD_OK ? 0 : report_error(s);
  }

  if (*bs) {
    zomd_bias_sweep_options o{};
    o.power = power;
    o.dimension = dim;
    o.point = point;
    o.gammas = gammas.data();
    o.n_gammas = gammas.size();
    o.samples = samples;
    o.seed = bs_seed;
    o.kernel = bs_kernel.c_str();
    o.noise = bs_noise.c_str();
    char* csv = nullptr;
    if (auto s = zomd_bias_sweep(&o, &csv); s != ZOMD_OK) return report_error(s);
    if (bs_out.empty()) {
      emit(csv);
      return 0;
    }
    std::filesystem::path p(bs_out);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    emit(csv, f);
    if (!f) {
      std::cerr << "error: cannot write " << bs_out << '\n';
      return 1;
    }
    return 0;
  }

  if (*rp) {
    const std::string out = rp_out.empty() ? default_out("reproduce-paper") : rp_out;
    char* text = nullptr;
    const zomd_status s = zomd_reproduce_paper(out.c_str(), rp_seed, rp_seeds, rp_T, rp_threads, &text);
    emit(text);
    if (s == ZOMD_OK || s == ZOMD_ERR_CHECK_FAILED) std::cout << "wrote " << out << '\n';
    return s == ZOMD_OK ? 0 : report_error(s);
  }
  return 0;
}
