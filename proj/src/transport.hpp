#pragma once

// Integer transportation problem with one budget row per job:
//
//   min  sum_v cost_v * x_v
//   s.t. sum_{v in job j} x_v       = demand_j
//        sum_{v on resource i} x_v <= capacity_i
//        sum_{v in job j} budget_v * x_v <= budget_limit_j
//        lower_v <= x_v <= upper_v, integer
//
// Without the budget rows the constraint matrix is totally unimodular and a
// min-cost flow gives the integer optimum; the budget rows are handled by
// branch-and-bound on top of that bound.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace metagrid::detail {

struct TransportVar {
  int job = 0;
  int resource = 0;
  double cost = 0.0;
  double budget = 0.0;
  int upper = 0;
};

struct TransportProblem {
  std::vector<int> demand;
  std::vector<int> capacity;
  std::vector<double> budget_limit;
  std::vector<TransportVar> vars;  ///< in tie-break order
};

struct FlowSolution {
  std::vector<int> value;
  double cost = 0.0;
  /// cost_v + pi(job) - pi(resource) under optimal potentials.
  std::vector<double> reduced_cost;
  /// No zero-reduced-cost cycle in the residual graph.
  bool unique = false;
};

/// Min-cost flow ignoring the budget rows. nullopt when the bounds leave the
/// demand unmet.
std::optional<FlowSolution> solve_flow(const TransportProblem& problem, std::span<const int> lower,
                                       std::span<const int> upper, bool want_duals = false);

struct TransportStats {
  std::uint64_t nodes = 0;
  std::uint64_t flow_solves = 0;
  bool root_tight = false;
  bool unique = false;
};

/// Optimal solution with the lexicographically smallest vector among optima,
/// or nullopt when infeasible.
std::optional<std::vector<int>> solve_transport(const TransportProblem& problem, TransportStats* stats = nullptr);

/// Any feasible solution, or nullopt.
std::optional<std::vector<int>> find_feasible(const TransportProblem& problem);

}  // namespace metagrid::detail
