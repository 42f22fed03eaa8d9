#pragma once

// Greedy baseline: jobs in QoS order, each placed whole on the cheapest
// resource that still fits it.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "metagrid/model.hpp"

namespace metagrid {

struct GreedyConfig {
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
};

/// Index of the real resource with the lowest rate for `job` among those with
/// at least pe_count PEs left in `remaining` and meeting deadline and budget.
/// Ties go to the lower placement cost, then the lower id. `work` counts the
/// resources examined.
std::optional<std::size_t> cheapest_fit(const JobRequest& job, const Instance& instance, std::span<const int> remaining,
                                        BudgetSemantics semantics, std::uint64_t* work = nullptr);

/// Unplaceable jobs are parked on the dummy resource.
Schedule greedy_schedule(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources,
                         const GreedyConfig& config = {});
Schedule greedy_schedule(const Instance& instance, const GreedyConfig& config = {});

}  // namespace metagrid
