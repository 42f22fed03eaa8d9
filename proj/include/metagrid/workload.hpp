#pragma once

// Seeded grids and job batches for the simulation study.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "metagrid/model.hpp"

namespace metagrid {

enum class DeadlineMode { Tight, Medium, Relaxed };

std::string to_string(DeadlineMode mode);
DeadlineMode parse_deadline_mode(const std::string& text);

/// Gaussian draw clamped to [lo, hi].
struct BoundedGaussian {
  double mean = 0.0;
  double sigma = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double sample(std::mt19937_64& rng) const;
};

struct ScenarioConfig {
  int resource_count = 25;
  int pe_min = 4;
  int pe_max = 12;
  double pe_mean = 8.0;
  double cost_mean = 4.5;
  double cost_min = 4.0;
  double cost_max = 5.0;
  double mips_mean = 500.0;
  double mips_sigma = 100.0;
  double mips_min = 200.0;
  double mips_max = 800.0;

  int job_count = 50;
  double tasks_mean = 5.0;
  double task_variation_min = 0.1;
  double task_variation_max = 0.5;
  double runtime_mean_s = 400.0;
  double runtime_variation = 0.2;
  DeadlineMode deadline_mode = DeadlineMode::Medium;
  double slack_tight_s = 50.0;
  double slack_medium_s = 250.0;
  double slack_relaxed_s = 500.0;
  double slack_variation = 0.2;
  double budget_factor = 2.0;
  double submit_window_s = 20.0;
  double schedule_interval_s = 50.0;
  JobKind job_kind = JobKind::Sgn;
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
  std::uint64_t rng_seed = 1;

  double slack_s() const;
};

/// Throws BadConfigError on bounds that cannot be sampled; returns warnings for
/// settings that are legal but off the study's grid (an empty grid, resource
/// counts other than 25, 50, 100, 150, 200).
std::vector<std::string> check_config(const ScenarioConfig& config);

std::vector<ResourceInfo> generate_grid(const ScenarioConfig& config, std::mt19937_64& rng);
std::vector<JobRequest> generate_jobs(const ScenarioConfig& config, std::mt19937_64& rng);

struct Workload {
  std::vector<ResourceInfo> resources;
  std::vector<JobRequest> jobs;
};

/// Grid and jobs from independent streams of config.rng_seed, so the grid of
/// a seed does not depend on the job settings and vice versa.
Workload generate_workload(const ScenarioConfig& config);

/// One record per line: `resource id=.. pes=.. mips=.. rate=..` or
/// `job id=.. user=.. kind=.. budget=.. deadline=.. submit=.. tasks=a,b,..`.
void write_text(std::ostream& out, const Workload& workload);
Workload read_text(std::istream& in);

std::string to_json(const Workload& workload);
Workload from_json(const std::string& text);

}  // namespace metagrid
