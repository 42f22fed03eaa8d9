#pragma once

// Parameter sweeps over resource counts, deadline modes, schedulers and
// seeds, their CSV results and the summary tables built from them.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "metagrid/evolutionary.hpp"
#include "metagrid/simulator.hpp"
#include "metagrid/workload.hpp"

namespace metagrid {

struct ExperimentConfig {
  /// Every field except resource_count, deadline_mode and rng_seed applies to
  /// all cells.
  ScenarioConfig scenario;
  GaParams ga;
  std::vector<int> resource_counts = {25, 50, 100, 150, 200};
  std::vector<DeadlineMode> deadline_modes = {DeadlineMode::Tight, DeadlineMode::Medium, DeadlineMode::Relaxed};
  std::vector<Scheduler> schedulers = all_schedulers();
  int seeds = 10;
  std::uint64_t base_seed = 1;
};

/// YAML with the sections `sweep`, `grid`, `jobs`, `simulation` and `ga`.
/// Missing keys keep their defaults; unknown keys and bad values throw
/// BadConfigError.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

/// Throws BadConfigError; returns warnings.
std::vector<std::string> check_config(const ExperimentConfig& config);

/// One-seed, 25-resource version of `config`.
ExperimentConfig quick(ExperimentConfig config);

struct ResultRow {
  std::uint64_t seed = 0;
  int resource_count = 0;
  DeadlineMode deadline_mode = DeadlineMode::Medium;
  std::string scheduler;
  double total_cost_gd = 0.0;
  int jobs_completed = 0;
  int tasks_completed = 0;
  int ga_iterations = 0;
  double wall_time_s = 0.0;
};

struct Cell {
  std::uint64_t seed = 0;
  int resource_count = 0;
  DeadlineMode deadline_mode = DeadlineMode::Medium;
  Scheduler scheduler = Scheduler::Greedy;
};

/// Cells in output order: seed, resource count, deadline mode, scheduler,
/// each in configured order.
std::vector<Cell> expand(const ExperimentConfig& config);

ScenarioConfig scenario_for(const ExperimentConfig& config, const Cell& cell);

struct RunOptions {
  unsigned threads = 1;
  /// Per-period JSON lines of every cell, tagged with the cell, in cell order.
  std::ostream* log = nullptr;
  /// Called after each finished cell with (done, total); may run on any worker.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every cell; rows come back in expand() order whatever the thread
/// count. A failing cell rethrows its exception after the workers stop.
std::vector<ResultRow> run_experiments(const ExperimentConfig& config, const RunOptions& options = {});

inline const std::vector<std::string> kCsvColumns = {"seed",           "resource_count",  "deadline_mode",
                                                     "scheduler",      "total_cost_gd",   "jobs_completed",
                                                     "tasks_completed", "ga_iterations",  "wall_time_s"};

/// Header plus one line per row. Without timing the wall_time_s cells are
/// left empty so reruns compare byte for byte.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool with_timing = true);

/// Accepts columns in any order and ignores extra ones. Throws
/// MissingColumnsError when a schema column is absent and BadConfigError on
/// malformed values. An empty stream gives no rows.
std::vector<ResultRow> read_csv(std::istream& in);

struct Stat {
  int n = 0;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single value.
  double stddev = 0.0;
};

Stat summarize(const std::vector<double>& values);

struct CellSummary {
  Stat cost;
  Stat jobs_completed;
  Stat tasks_completed;
  Stat ga_iterations;
  Stat wall_time_s;
};

struct GroupKey {
  DeadlineMode deadline_mode = DeadlineMode::Medium;
  int resource_count = 0;
  std::string scheduler;

  std::strong_ordering operator<=>(const GroupKey& other) const;
  bool operator==(const GroupKey& other) const = default;
};

/// Aggregates over seeds, keyed by (mode, resource count, scheduler). Known
/// schedulers sort in their canonical order, unknown names after them.
std::map<GroupKey, CellSummary> aggregate(const std::vector<ResultRow>& rows);

/// Per-mode tables of mean +- stddev cost per scheduler, the relaxed-mgn cost
/// table across modes and the HGA/LPGA iteration table, as Markdown.
std::string summary_tables(const std::map<GroupKey, CellSummary>& groups);

/// mode,scheduler,resource_count,n,mean_cost_gd,stddev_cost_gd,mean_jobs_completed
std::string cost_series_csv(const std::map<GroupKey, CellSummary>& groups);

/// mode,resource_count,hga_mean_iterations,lpga_mean_iterations,reduction_pct.
/// Rows appear only where both schedulers are present.
std::string iteration_series_csv(const std::map<GroupKey, CellSummary>& groups);

/// Writes summary.md, cost_series.csv and iteration_series.csv into `dir`.
void write_report(const std::string& dir, const std::map<GroupKey, CellSummary>& groups);

}  // namespace metagrid
