// SPDX-License-Identifier: Apache-2.0
//
// Time-varying weighted digraphs A(t) and the consensus step
//
//   y_i = sum_j a_ij(t) x_j
//
// Entry a_ij is the weight agent i puts on the state it receives from agent j,
// i.e. a positive a_ij encodes the directed edge j -> i.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "zomd/common.hpp"

namespace zomd::graph {

inline constexpr double kStochasticTolerance = 1e-9;

class WeightMatrix {
 public:
  /// `entries` is row-major, n*n values.
  WeightMatrix(std::size_t n, std::vector<double> entries, double l_bound);

  static WeightMatrix identity(std::size_t n, double l_bound);
  static WeightMatrix from_rows(const std::vector<std::vector<double>>& rows, double l_bound);

  std::size_t size() const noexcept { return n_; }
  double l_bound() const noexcept { return l_bound_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const noexcept { return entries_; }

  /// True when agent i receives from agent j (i != j, a_ij > 0).
  bool has_edge(std::size_t from, std::size_t to) const { return from != to && (*this)(to, from) > 0.0; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
  double l_bound_;
};

struct Violation {
  enum class Kind { kRowSum, kColumnSum, kEntryRange, kDiagonal, kNegative };
  Kind kind;
  std::size_t row;  // for column-sum violations this is unused
  std::size_t col;  // for row-sum violations this is unused
  double observed;
  std::string message;
};

/// Every violated invariant of a weight matrix. Empty when the matrix is
/// doubly stochastic, has a positive diagonal and all positive entries lie in
/// [l_bound, 1].
std::vector<Violation> validate_weight_matrix(const WeightMatrix& a);

enum class ScheduleMode { kCyclic, kExplicit };

struct MixingConstants {
  double C;
  double lambda;
};

class GraphSchedule {
 public:
  GraphSchedule(std::vector<WeightMatrix> matrices, ScheduleMode mode, std::size_t window);

  std::size_t agents() const noexcept { return matrices_.front().size(); }
  std::size_t period() const noexcept { return matrices_.size(); }
  std::size_t window() const noexcept { return window_; }
  ScheduleMode mode() const noexcept { return mode_; }
  const std::vector<WeightMatrix>& matrices() const noexcept { return matrices_; }

  /// Smallest l_bound declared across the matrices.
  double l_bound() const;

  /// A(t) for a round t >= 1. Cyclic schedules wrap; explicit schedules
  /// throw ParameterError past their horizon.
  const WeightMatrix& at(std::size_t t) const;

  /// Same schedule with the first `shift` matrices moved to the back.
  GraphSchedule rotated(std::size_t shift) const;

 private:
  std::vector<WeightMatrix> matrices_;
  ScheduleMode mode_;
  std::size_t window_;
};

struct ConnectivityResult {
  bool connected;
  std::optional<std::size_t> first_failing_window;  // zero-based window start
};

/// Every window of U consecutive matrices (all residues for cyclic schedules,
/// all starts for explicit ones) must have a strongly connected edge union.
/// An explicit schedule shorter than U is judged on its single partial window.
ConnectivityResult check_uniform_connectivity(const GraphSchedule& schedule);

/// Strong connectivity of a digraph given as adjacency lists (Tarjan).
bool strongly_connected(const std::vector<std::vector<std::size_t>>& adjacency);

/// C and lambda of the geometric bound |[A(t)...A(s)]_ij - 1/n| <= C lambda^(t-s).
MixingConstants mixing_constants(std::size_t n, std::size_t window, double l);

/// y_i = sum_j a_ij(t) x_j.
std::vector<Vector> mix(const GraphSchedule& schedule, std::size_t t, const std::vector<Vector>& states);
std::vector<Vector> mix(const WeightMatrix& a, const std::vector<Vector>& states);

/// max_ij |[A(t) A(t-1) ... A(s)]_ij - 1/n| for 1 <= s <= t.
double product_deviation(const GraphSchedule& schedule, std::size_t t, std::size_t s);

/// Named schedules: "fig1" (6 agents, four switching graphs, U = 4),
/// "complete" and "identity" (single matrix, any n).
GraphSchedule preset(const std::string& name, std::size_t n = 0);

/// The four-graph cycle used by the sensor-network experiment. Each graph is
/// a disjoint union of directed cycles with weight 1/2 on the self loop and
/// 1/2 on the incoming edge:
///   (a) 1 -> 2 -> 3 -> 1   (b) 3 <-> 4   (c) 4 -> 5 -> 6 -> 4   (d) 6 <-> 1
/// No single graph is strongly connected; every 4 consecutive ones are.
GraphSchedule fig1_schedule();

}  // namespace zomd::graph
