// SPDX-License-Identifier: Apache-2.0
#include "zomd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

namespace zomd::io {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw Error("empty CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || end != cell.data() + cell.size()) {
        throw Error(fmt::format("CSV cell '{}' is not a number", cell));
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw Error(fmt::format("CSV row has {} cells, header has {}", row.size(), table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

template <typename Range>
void emit_row(std::ostream& os, const Range& cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::vector<std::string> indexed(const std::string& base, std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= m; ++k) out.push_back(fmt::format("{}_{}", base, k));
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& table) {
  emit_row(os, table.header);
  std::vector<std::string> cells;
  for (const auto& row : table.rows) {
    cells.clear();
    for (double v : row) cells.push_back(format_double(v));
    emit_row(os, cells);
  }
}

void write_metrics_csv(std::ostream& os, const engine::RunMetrics& metrics) {
  std::vector<std::string> header{"t", "agent", "regret_cum", "regret_avg", "consensus_err", "clip_active"};
  for (auto& h : indexed("x", metrics.dimension)) header.push_back(h);
  emit_row(os, header);
  std::vector<std::string> cells;
  for (std::size_t t = 1; t <= metrics.horizon; ++t) {
    for (std::size_t i = 0; i < metrics.agents; ++i) {
      cells.clear();
      cells.push_back(std::to_string(t));
      cells.push_back(std::to_string(i + 1));
      cells.push_back(format_double(metrics.regret[t - 1][i]));
      cells.push_back(format_double(metrics.regret_avg(t, i)));
      cells.push_back(format_double(metrics.consensus_error[t - 1]));
      cells.push_back(metrics.clip_active[t - 1][i] ? "1" : "0");
      for (double v : metrics.states[t - 1][i]) cells.push_back(format_double(v));
      emit_row(os, cells);
    }
  }
}

void write_benchmark_csv(std::ostream& os, const engine::RunMetrics& metrics) {
  std::vector<std::string> header{"t"};
  for (auto& h : indexed("xstar", metrics.dimension)) header.push_back(h);
  header.push_back("xi_t_cum");
  emit_row(os, header);
  std::vector<std::string> cells;
  for (std::size_t t = 1; t <= metrics.horizon; ++t) {
    cells.clear();
    cells.push_back(std::to_string(t));
    for (double v : metrics.benchmark.points[t - 1]) cells.push_back(format_double(v));
    cells.push_back(format_double(metrics.variation_cum[t - 1]));
    emit_row(os, cells);
  }
}

void write_quantiles_csv(std::ostream& os, const engine::QuantileTable& table) {
  os << "checkpoint,delta,quantile_value\n";
  for (std::size_t c = 0; c < table.checkpoints.size(); ++c) {
    for (std::size_t d = 0; d < table.deltas.size(); ++d) {
      os << table.checkpoints[c] << ',' << format_double(table.deltas[d]) << ',' << format_double(table.value[c][d])
         << '\n';
    }
  }
}

void write_bias_csv(std::ostream& os, const std::vector<estimator::BiasRow>& rows) {
  const std::size_t m = rows.empty() ? 0 : rows.front().mean.size();
  std::vector<std::string> header{"gamma"};
  for (auto& h : indexed("mean", m)) header.push_back(h);
  header.push_back("stderr");
  for (auto& h : indexed("true_grad", m)) header.push_back(h);
  emit_row(os, header);
  std::vector<std::string> cells;
  for (const auto& r : rows) {
    cells.clear();
    cells.push_back(format_double(r.gamma));
    for (double v : r.mean) cells.push_back(format_double(v));
    cells.push_back(format_double(r.max_stderr()));
    for (double v : r.true_gradient) cells.push_back(format_double(v));
    emit_row(os, cells);
  }
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  body(os);
  if (!os) throw Error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace zomd::io
