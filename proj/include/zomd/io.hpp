// SPDX-License-Identifier: Apache-2.0
//
// CSV emission. Every floating-point value is written with 17 significant
// digits so that parsing and re-emitting a file reproduces it byte for byte.
#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "zomd/engine.hpp"
#include "zomd/estimator.hpp"

namespace zomd::io {

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream& is);
void write_csv(std::ostream& os, const CsvTable& table);

/// t, agent, regret_cum, regret_avg, consensus_err, clip_active, x_1..x_m
void write_metrics_csv(std::ostream& os, const engine::RunMetrics& metrics);
/// t, xstar_1..xstar_m, xi_t_cum
void write_benchmark_csv(std::ostream& os, const engine::RunMetrics& metrics);
/// checkpoint, delta, quantile_value
void write_quantiles_csv(std::ostream& os, const engine::QuantileTable& table);
/// gamma, mean_1..mean_m, stderr, true_grad_1..true_grad_m
void write_bias_csv(std::ostream& os, const std::vector<estimator::BiasRow>& rows);

/// Opens `path` for writing, creating parent directories; throws zomd::Error on failure.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace zomd::io
