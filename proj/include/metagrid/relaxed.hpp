#pragma once

// The MGN relaxation: minimise the schedule cost over integer PE allocations
// with the one-resource-per-job constraints dropped. Optimal for MGN jobs and
// a lower bound for SGN jobs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metagrid/model.hpp"

namespace metagrid {

struct RelaxedConfig {
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
  /// When false, demand that cannot be met raises InfeasibleError instead of
  /// spilling onto a dummy resource.
  bool allow_dummy = true;
};

/// One decision variable r_ij that survived the deadline and budget filters.
struct FeasiblePair {
  ResourceId resource;
  JobId job;
  std::size_t resource_index = 0;
  std::size_t job_index = 0;
  double cost_coeff = 0.0;    ///< G$ per allocated PE: c_ij * exec_time
  double budget_coeff = 0.0;  ///< budget-row coefficient per PE, zero on the dummy
  int upper = 0;              ///< min(n_i, m_j)
};

class RelaxedModel {
 public:
  const Instance& instance() const { return instance_; }
  /// Sorted by (resource_id, job_id).
  std::span<const FeasiblePair> pairs() const { return pairs_; }
  BudgetSemantics budget_semantics() const { return budget_; }
  bool has_dummy() const { return instance_.dummy_index().has_value(); }

  std::set<std::pair<ResourceId, JobId>> feasible_pairs() const;
  std::optional<double> cost_coeff(ResourceId resource, JobId job) const;

  /// sum cost_coeff * r_ij, dummy entries included.
  double objective(const AllocationMatrix& alloc) const;

  /// Debug dump: objective, then one constraint row per line.
  std::string to_lp_text() const;

 private:
  friend RelaxedModel build_relaxed(std::vector<JobRequest>, std::vector<ResourceInfo>, const RelaxedConfig&);

  Instance instance_;
  std::vector<FeasiblePair> pairs_;
  BudgetSemantics budget_ = BudgetSemantics::TimeInclusive;
};

/// Filters pairs by the deadline and single-PE budget viability, then adds a dummy
/// resource when the real grid cannot absorb the demand. Throws EmptyGridError
/// for an empty grid with the dummy disabled.
RelaxedModel build_relaxed(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources,
                           const RelaxedConfig& config = {});

struct SolverStats {
  std::uint64_t nodes = 0;
  std::uint64_t flow_solves = 0;
  bool root_tight = false;   ///< the budget-free optimum already met every budget row
  bool unique = false;       ///< no tie search was needed
};

/// Exact optimum over integer allocations; ties resolve to the lexicographically
/// smallest allocation vector in (resource_id, job_id) order. Throws
/// InfeasibleError when no allocation meets the constraints.
AllocationMatrix solve_relaxed(const RelaxedModel& model, SolverStats* stats = nullptr);

/// Exhaustive enumeration with the same tie rule. Only for small models: at
/// most 20 PEs demanded and 4 resources, else TooLargeError.
AllocationMatrix brute_force_relaxed(const RelaxedModel& model);

}  // namespace metagrid
