#pragma once

// Discrete-event harness: jobs arrive, a scheduler places the pending queue
// at every period boundary, placed jobs hold their PEs until they finish and
// parked jobs roll over to the next period.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metagrid/evolutionary.hpp"
#include "metagrid/model.hpp"
#include "metagrid/workload.hpp"

namespace metagrid {

enum class Scheduler { Greedy, Mmc, Hga, Lpga, RelaxedMgn };

std::string to_string(Scheduler scheduler);
/// greedy, mmc, hga, lpga, relaxed-mgn. Throws UnknownSchedulerError.
Scheduler parse_scheduler(const std::string& text);
const std::vector<Scheduler>& all_schedulers();

struct ScenarioMetrics {
  double total_cost_gd = 0.0;
  int jobs_submitted = 0;
  int jobs_completed = 0;
  int tasks_completed = 0;
  int jobs_missed = 0;
  /// Still waiting when the run stopped at its period limit.
  int jobs_queued = 0;
  /// Summed over periods; 0 for schedulers without a GA.
  int ga_iterations = 0;
  /// Jobs rolled over at the end of each period.
  std::vector<int> rollover_count;
  double wall_time_s = 0.0;
};

struct SimulationOptions {
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
  GaParams ga;
  double schedule_interval_s = 50.0;
  /// Base for the per-period GA seeds.
  std::uint64_t seed = 0;
  int max_periods = 10000;
  /// Verify every schedule and the capacity, deadline and conservation
  /// invariants; a breach throws Error.
  bool check_invariants = true;
  /// When set, one JSON object per period is written here.
  std::ostream* log = nullptr;
};

/// One period's decision for a queue of jobs whose deadlines already count
/// from the period start. Mode is MGN for relaxed-mgn, SGN otherwise.
struct PeriodDecision {
  Schedule schedule;
  Instance instance;
  int ga_iterations = 0;
};
PeriodDecision schedule_period(Scheduler scheduler, std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources,
                               const SimulationOptions& options, std::uint64_t period_seed);

struct RolloverResult {
  std::vector<JobRequest> queue;
  std::vector<JobRequest> missed;
};

/// Keeps the jobs `schedule` parked whose deadline (counted from submission)
/// is still ahead at `next_period_s`; parked jobs already past it are missed.
/// Placed jobs leave the queue.
RolloverResult rollover(const std::vector<JobRequest>& queue, const Schedule& schedule, double next_period_s);

ScenarioMetrics simulate(const std::vector<JobRequest>& jobs, const std::vector<ResourceInfo>& resources,
                         Scheduler scheduler, const SimulationOptions& options = {});

/// Generates the workload of `config` and simulates it.
ScenarioMetrics run_scenario(const ScenarioConfig& config, Scheduler scheduler, const GaParams& ga = {},
                             std::ostream* log = nullptr);

}  // namespace metagrid
