// SPDX-License-Identifier: Apache-2.0
#include "zomd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/core.h>

namespace zomd::graph {

WeightMatrix::WeightMatrix(std::size_t n, std::vector<double> entries, double l_bound)
    : n_(n), entries_(std::move(entries)), l_bound_(l_bound) {
  if (n_ == 0) throw ParameterError("weight matrix needs at least one agent");
  if (entries_.size() != n_ * n_) {
    throw ParameterError(fmt::format("weight matrix of size {} needs {} entries, got {}", n_, n_ * n_,
                                     entries_.size()));
  }
  // l = 1 only makes sense for the single-agent identity, but it is harmless elsewhere.
  if (!(l_bound_ > 0.0 && l_bound_ <= 1.0)) {
    throw ParameterError(fmt::format("l_bound must lie in (0,1], got {}", l_bound_));
  }
}

WeightMatrix WeightMatrix::identity(std::size_t n, double l_bound) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return WeightMatrix(n, std::move(e), l_bound);
}

WeightMatrix WeightMatrix::from_rows(const std::vector<std::vector<double>>& rows, double l_bound) {
  const std::size_t n = rows.size();
  std::vector<double> e;
  e.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ParameterError(fmt::format("weight matrix row {} has {} entries, expected {}", i, rows[i].size(), n));
    }
    e.insert(e.end(), rows[i].begin(), rows[i].end());
  }
  return WeightMatrix(n, std::move(e), l_bound);
}

std::vector<Violation> validate_weight_matrix(const WeightMatrix& a) {
  std::vector<Violation> out;
  const std::size_t n = a.size();
  const double l = a.l_bound();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = a(i, j);
      row += v;
      if (v < 0.0) {
        out.push_back({Violation::Kind::kNegative, i, j, v, fmt::format("entry ({},{}) is negative: {}", i, j, v)});
      } else if (v > 0.0 && (v < l - kStochasticTolerance || v > 1.0 + kStochasticTolerance)) {
        out.push_back({Violation::Kind::kEntryRange, i, j, v,
                       fmt::format("entry ({},{}) = {} is neither 0 nor in [{}, 1]", i, j, v, l)});
      }
    }
    if (!(a(i, i) > 0.0)) {
      out.push_back({Violation::Kind::kDiagonal, i, i, a(i, i), fmt::format("diagonal entry ({0},{0}) is not positive", i)});
    }
    if (std::abs(row - 1.0) > kStochasticTolerance) {
      out.push_back({Violation::Kind::kRowSum, i, 0, row, fmt::format("row {} sums to {}", i, row)});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += a(i, j);
    if (std::abs(col - 1.0) > kStochasticTolerance) {
      out.push_back({Violation::Kind::kColumnSum, 0, j, col, fmt::format("column {} sums to {}", j, col)});
    }
  }
  return out;
}

GraphSchedule::GraphSchedule(std::vector<WeightMatrix> matrices, ScheduleMode mode, std::size_t window)
    : matrices_(std::move(matrices)), mode_(mode), window_(window) {
  if (matrices_.empty()) throw ParameterError("graph schedule needs at least one matrix");
  if (window_ == 0) throw ParameterError("connectivity window U must be positive");
  const std::size_t n = matrices_.front().size();
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    if (matrices_[k].size() != n) {
      throw ParameterError(fmt::format("matrix {} has {} agents, expected {}", k, matrices_[k].size(), n));
    }
  }
}

double GraphSchedule::l_bound() const {
  double l = 1.0;
  for (const auto& m : matrices_) l = std::min(l, m.l_bound());
  return l;
}

const WeightMatrix& GraphSchedule::at(std::size_t t) const {
  if (t == 0) throw ParameterError("rounds are numbered from 1");
  if (mode_ == ScheduleMode::kCyclic) return matrices_[(t - 1) % matrices_.size()];
  if (t > matrices_.size()) {
    throw ParameterError(fmt::format("round {} is past the explicit schedule horizon {}", t, matrices_.size()));
  }
  return matrices_[t - 1];
}

GraphSchedule GraphSchedule::rotated(std::size_t shift) const {
  std::vector<WeightMatrix> m(matrices_);
  std::rotate(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(shift % m.size()), m.end());
  return GraphSchedule(std::move(m), mode_, window_);
}

bool strongly_connected(const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n <= 1) return true;
  // Tarjan; the graph is strongly connected iff exactly one component is found.
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, components = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : adjacency[v]) {
      if (index[w] == SIZE_MAX) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      ++components;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
      } while (w != v);
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == SIZE_MAX) visit(v);
  }
  return components == 1;
}

namespace {

bool window_connected(const GraphSchedule& schedule, std::size_t start, std::size_t length) {
  const std::size_t n = schedule.agents();
  std::vector<std::vector<bool>> edge(n, std::vector<bool>(n, false));
  const auto& mats = schedule.matrices();
  for (std::size_t k = 0; k < length; ++k) {
    const auto& a = mats[(start + k) % mats.size()];
    for (std::size_t from = 0; from < n; ++from) {
      for (std::size_t to = 0; to < n; ++to) {
        if (a.has_edge(from, to)) edge[from][to] = true;
      }
    }
  }
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) {
      if (edge[from][to]) adj[from].push_back(to);
    }
  }
  return strongly_connected(adj);
}

}  // namespace

ConnectivityResult check_uniform_connectivity(const GraphSchedule& schedule) {
  const std::size_t p = schedule.period();
  const std::size_t u = schedule.window();
  if (schedule.mode() == ScheduleMode::kCyclic) {
    for (std::size_t k = 0; k < p; ++k) {
      if (!window_connected(schedule, k, u)) return {false, k};
    }
    return {true, std::nullopt};
  }
  if (p < u) {
    if (!window_connected(schedule, 0, p)) return {false, 0};
    return {true, std::nullopt};
  }
  for (std::size_t k = 0; k + u <= p; ++k) {
    if (!window_connected(schedule, k, u)) return {false, k};
  }
  return {true, std::nullopt};
}

MixingConstants mixing_constants(std::size_t n, std::size_t window, double l) {
  if (n < 2) throw ParameterError("mixing constants need at least two agents");
  if (window < 1) throw ParameterError("connectivity window U must be positive");
  if (!(l > 0.0 && l < 1.0)) throw ParameterError(fmt::format("l must lie in (0,1), got {}", l));
  const double e = static_cast<double>((n - 1) * window);
  const double le = std::pow(l, e);
  const double C = 2.0 * (1.0 + 1.0 / le) / (1.0 - le);
  const double lambda = std::exp(std::log1p(-le) / e);
  return {C, lambda};
}

std::vector<Vector> mix(const WeightMatrix& a, const std::vector<Vector>& states) {
  const std::size_t n = a.size();
  if (states.size() != n) {
    throw ParameterError(fmt::format("mix expects {} states, got {}", n, states.size()));
  }
  const std::size_t m = states.front().size();
  for (const auto& s : states) {
    if (s.size() != m) throw ParameterError("mix: states have mismatched dimensions");
  }
  std::vector<Vector> out(n, Vector(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(i, j);
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) out[i][k] += w * states[j][k];
    }
  }
  return out;
}

std::vector<Vector> mix(const GraphSchedule& schedule, std::size_t t, const std::vector<Vector>& states) {
  return mix(schedule.at(t), states);
}

double product_deviation(const GraphSchedule& schedule, std::size_t t, std::size_t s) {
  if (s == 0 || s > t) throw ParameterError("product_deviation needs 1 <= s <= t");
  const std::size_t n = schedule.agents();
  // P <- A(r) P for r = s+1..t, starting from P = A(s).
  std::vector<double> p = schedule.at(s).entries();
  std::vector<double> next(n * n);
  for (std::size_t r = s + 1; r <= t; ++r) {
    const auto& a = schedule.at(r);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * p[k * n + j];
        next[i * n + j] = acc;
      }
    }
    p.swap(next);
  }
  const double target = 1.0 / static_cast<double>(n);
  double dev = 0.0;
  for (double v : p) dev = std::max(dev, std::abs(v - target));
  return dev;
}

namespace {

// Directed cycle c[0] -> c[1] -> ... -> c[0] with half weight on self loops.
void add_cycle(std::vector<double>& e, std::size_t n, const std::vector<std::size_t>& cycle) {
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const std::size_t to = cycle[(k + 1) % cycle.size()];
    const std::size_t from = cycle[k];
    e[to * n + to] = 0.5;
    e[to * n + from] = 0.5;
  }
}

WeightMatrix cycles_matrix(std::size_t n, const std::vector<std::vector<std::size_t>>& cycles) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  for (const auto& c : cycles) add_cycle(e, n, c);
  return WeightMatrix(n, std::move(e), 0.5);
}

}  // namespace

GraphSchedule fig1_schedule() {
  constexpr std::size_t n = 6;
  std::vector<WeightMatrix> m;
  m.push_back(cycles_matrix(n, {{0, 1, 2}}));
  m.push_back(cycles_matrix(n, {{2, 3}}));
  m.push_back(cycles_matrix(n, {{3, 4, 5}}));
  m.push_back(cycles_matrix(n, {{5, 0}}));
  return GraphSchedule(std::move(m), ScheduleMode::kCyclic, 4);
}

GraphSchedule preset(const std::string& name, std::size_t n) {
  if (name == "fig1") {
    if (n != 0 && n != 6) throw ConfigError("graph preset fig1 has exactly 6 agents");
    return fig1_schedule();
  }
  if (n == 0) throw ConfigError(fmt::format("graph preset '{}' needs an agent count n", name));
  if (name == "complete") {
    std::vector<double> e(n * n, 1.0 / static_cast<double>(n));
    const double l = n == 1 ? 1.0 : 1.0 / static_cast<double>(n);
    return GraphSchedule({WeightMatrix(n, std::move(e), l)}, ScheduleMode::kCyclic, 1);
  }
  if (name == "identity") {
    return GraphSchedule({WeightMatrix::identity(n, n == 1 ? 1.0 : 0.5)}, ScheduleMode::kCyclic, 1);
  }
  throw ConfigError(fmt::format("unknown graph preset '{}' (known: fig1, complete, identity)", name));
}

}  // namespace zomd::graph
