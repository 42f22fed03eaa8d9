#pragma once

// Modified MinCost: rounds a relaxed (split) allocation into one where every
// job sits whole on a single resource.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "metagrid/model.hpp"

namespace metagrid {

/// How one job's PEs are spread over providers in a relaxed allocation.
struct JobMapping {
  JobId job;
  /// Positive PE counts in ascending resource id.
  std::vector<std::pair<ResourceId, int>> provider_allocations;

  std::size_t provider_count() const { return provider_allocations.size(); }
  int pes_on(ResourceId resource) const;
};

/// One mapping per job of `instance`, in ascending job id. A job absent from
/// `alloc` gets an empty provider list.
std::vector<JobMapping> job_mappings(const AllocationMatrix& alloc, const Instance& instance);

struct MmcConfig {
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
};

/// Working state while rounding. Placements are final once recorded.
class MmcState {
 public:
  MmcState(const Instance& instance, BudgetSemantics semantics);

  const Instance& instance() const { return instance_; }
  BudgetSemantics semantics() const { return semantics_; }

  /// PEs of a real resource not yet promised to a placed job.
  int remaining(ResourceId resource) const;
  /// Per resource index of the instance.
  std::span<const int> remaining_pes() const { return remaining_; }
  bool is_placed(JobId job) const { return placement_.contains(job); }
  /// nullopt means parked on the dummy resource.
  std::optional<ResourceId> placement(JobId job) const { return placement_.at(job); }
  const std::map<JobId, std::optional<ResourceId>>& placements() const { return placement_; }

  /// Whole job on `resource` meets capacity, deadline and budget.
  bool fits(const JobRequest& job, ResourceId resource);
  void place(JobId job, ResourceId resource);
  void park(JobId job);

  std::uint64_t work() const { return work_; }
  void count(std::uint64_t steps = 1) { work_ += steps; }

  Schedule to_schedule() const;

 private:
  Instance instance_;
  BudgetSemantics semantics_;
  std::vector<int> remaining_;
  std::map<JobId, std::optional<ResourceId>> placement_;
  std::uint64_t work_ = 0;
};

struct Remap {
  JobId job;
  /// nullopt when parked on the dummy resource.
  std::optional<ResourceId> to;
};

struct InterchangeReport {
  ResourceId provider;
  JobId trigger;
  std::vector<Remap> moves;
};

/// After `trigger` has been placed whole on `provider`, rehouses every job of
/// `displaced` (unplaced jobs that held PEs on `provider`) on one of the
/// trigger's other relaxed providers, cheapest placement first, or parks it.
/// Displaced jobs are visited smallest PE demand first.
InterchangeReport interchange_capacity(ResourceId provider, const JobMapping& trigger,
                                       const std::vector<JobMapping>& displaced, MmcState& state);

struct MmcTrace {
  Schedule schedule;
  std::uint64_t work = 0;
  std::vector<InterchangeReport> interchanges;
  /// Jobs left single-provider by the relaxation and kept where they were.
  std::set<JobId> frozen;
  /// Jobs parked during rounding, before the greedy second pass.
  std::set<JobId> parked;
};

/// `relaxed` must cover every job of `instance`. A dummy resource is added to
/// the instance when absent; the returned schedule refers to it.
Schedule modified_min_cost(const std::vector<JobMapping>& relaxed, const Instance& instance, const MmcConfig& config = {});
MmcTrace modified_min_cost_traced(const std::vector<JobMapping>& relaxed, const Instance& instance,
                                  const MmcConfig& config = {});

/// Places parked jobs, in QoS order, on the cheapest real resource that still
/// fits them. Jobs that fit nowhere stay parked.
Schedule schedule_dummy_jobs(const Schedule& schedule, const Instance& instance, const MmcConfig& config = {});

}  // namespace metagrid
