#pragma once

// Core scheduling model: resource publishes, job QoS demands, allocations and
// the cost/feasibility evaluation every scheduler in this library shares.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metagrid/errors.hpp"

namespace metagrid {

/// Comparison tolerance applied to money and time in constraint checks.
inline constexpr double kTolerance = 1e-9;

/// a <= b up to kTolerance, scaled by the magnitude of b.
bool approx_leq(double a, double b);
bool approx_eq(double a, double b);

struct ResourceId {
  std::uint32_t value = 0;

  static constexpr ResourceId dummy() { return ResourceId{0xFFFFFFFFu}; }
  constexpr bool is_dummy() const { return value == 0xFFFFFFFFu; }

  friend constexpr auto operator<=>(ResourceId, ResourceId) = default;
};

struct JobId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(JobId, JobId) = default;
};

std::string to_string(ResourceId id);
std::string to_string(JobId id);

enum class JobKind { Mgn, Sgn };

/// How the per-job budget row is evaluated.
///  - Literal: sum_i r_ij * c_ij <= b_j (rate per PE, no time factor).
///  - TimeInclusive: the job's share of the schedule cost <= b_j.
enum class BudgetSemantics { Literal, TimeInclusive };

std::string to_string(JobKind kind);
std::string to_string(BudgetSemantics semantics);
JobKind parse_job_kind(const std::string& text);
BudgetSemantics parse_budget_semantics(const std::string& text);

/// Per-job cost rates of one resource in G$/PE/s. A resource normally
/// charges every job the same rate; individual jobs may be overridden.
class CostRates {
 public:
  CostRates() = default;
  explicit CostRates(double uniform_rate) : uniform_(uniform_rate) {}

  double rate(JobId job) const;
  double uniform_rate() const { return uniform_; }
  void set(JobId job, double rate) { overrides_[job] = rate; }
  const std::map<JobId, double>& overrides() const { return overrides_; }

  double max_rate() const;
  double min_rate() const;
  CostRates scaled(double factor) const;

  friend bool operator==(const CostRates&, const CostRates&) = default;

 private:
  double uniform_ = 1.0;
  std::map<JobId, double> overrides_;
};

/// A provider's publish: free PEs, cost rates and PE speed.
struct ResourceInfo {
  ResourceId id;
  int free_pes = 0;
  CostRates cost_per_pe_second;
  double pe_speed_mips = 1.0;
  bool is_dummy = false;

  friend bool operator==(const ResourceInfo&, const ResourceInfo&) = default;
};

/// A user's QoS demand for one job.
struct JobRequest {
  std::uint32_t user_id = 0;
  JobId id;
  double budget_gd = 0.0;
  double deadline_s = 0.0;
  std::vector<double> task_sizes_mi;
  int pe_count = 0;
  JobKind kind = JobKind::Sgn;
  double submit_time_s = 0.0;

  double max_task_mi() const;

  friend bool operator==(const JobRequest&, const JobRequest&) = default;
};

/// Builds a job whose pe_count matches its task list.
JobRequest make_job(JobId id, std::vector<double> task_sizes_mi, double deadline_s, double budget_gd,
                    JobKind kind = JobKind::Sgn, std::uint32_t user_id = 0, double submit_time_s = 0.0);

ResourceInfo make_resource(ResourceId id, int free_pes, double pe_speed_mips, double cost_rate);

/// Throws InvalidModelError when the record breaks its invariants.
void check_invariants(const JobRequest& job);
void check_invariants(const ResourceInfo& resource);

/// Seconds until the slowest task of `job` finishes on one PE of `resource`.
double exec_time(const JobRequest& job, const ResourceInfo& resource);

/// Budget-row contribution of `pes` PEs of `job` on `resource`.
double budget_usage(const JobRequest& job, const ResourceInfo& resource, int pes, BudgetSemantics semantics);

/// Cost term for `pes` PEs of `job` on `resource`.
double placement_cost(const JobRequest& job, const ResourceInfo& resource, int pes);

/// Priority key used for job ordering: budget per PE-deadline unit.
double qos_index(const JobRequest& job);

/// Jobs sorted by descending QoS index, ties by ascending id.
std::vector<std::size_t> qos_order(std::span<const JobRequest> jobs);

/// Stand-in for unbounded overflow capacity. Never cost-preferred: its rate is
/// ten times the dearest real rate, its speed the fastest real speed.
ResourceInfo make_dummy_resource(std::span<const JobRequest> jobs, std::span<const ResourceInfo> resources);

/// Jobs and resources indexed by id. Records are kept sorted by id, the dummy
/// resource (if any) last.
class Instance {
 public:
  Instance() = default;
  Instance(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources);

  /// Same as the constructor, with a dummy resource appended when absent.
  static Instance with_dummy(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources);

  std::span<const JobRequest> jobs() const { return jobs_; }
  std::span<const ResourceInfo> resources() const { return resources_; }

  /// Copy of `instance` with a dummy resource, or the instance itself when
  /// it already has one.
  static Instance with_dummy(const Instance& instance);

  std::optional<std::size_t> find_job(JobId id) const;
  std::optional<std::size_t> find_resource(ResourceId id) const;
  std::size_t job_index(JobId id) const;
  std::size_t resource_index(ResourceId id) const;
  const JobRequest& job(JobId id) const { return jobs_[job_index(id)]; }
  const ResourceInfo& resource(ResourceId id) const { return resources_[resource_index(id)]; }

  std::optional<std::size_t> dummy_index() const { return dummy_; }
  int total_demand() const;

 private:
  std::vector<JobRequest> jobs_;
  std::vector<ResourceInfo> resources_;
  std::map<JobId, std::size_t> job_pos_;
  std::map<ResourceId, std::size_t> resource_pos_;
  std::optional<std::size_t> dummy_;
};

/// r_ij: PEs of job j placed on resource i. Absent entries are zero; entries
/// iterate in (resource_id, job_id) order.
class AllocationMatrix {
 public:
  using Key = std::pair<ResourceId, JobId>;

  int get(ResourceId resource, JobId job) const;
  /// Setting zero removes the entry. Negative counts are stored so that
  /// validate() can report them.
  void set(ResourceId resource, JobId job, int pes);
  void add(ResourceId resource, JobId job, int pes) { set(resource, job, get(resource, job) + pes); }
  void erase_job(JobId job);

  const std::map<Key, int>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  /// Resources holding positive PEs of `job`, ascending id.
  std::vector<std::pair<ResourceId, int>> providers_of(JobId job) const;
  int pes_on(ResourceId resource) const;

  friend bool operator==(const AllocationMatrix&, const AllocationMatrix&) = default;

 private:
  std::map<Key, int> entries_;
};

/// Total cost over non-dummy resources. Throws UnknownIdError on unresolved keys.
double schedule_cost(const AllocationMatrix& alloc, const Instance& instance);

struct Violation {
  enum class Kind { Capacity, PeRequirement, SplitSgnJob, MultipleResources, Budget, Deadline, Negative };

  Kind kind;
  std::optional<ResourceId> resource;
  std::optional<JobId> job;
  std::string detail;
};

std::string to_string(Violation::Kind kind);

/// Checks capacity, PE demand, budget, deadline and sign rows and, in SGN
/// mode, the single-resource rows. Dummy
/// resources are exempt from the budget and deadline rows since their jobs
/// never execute.
std::vector<Violation> validate(const AllocationMatrix& alloc, const Instance& instance, JobKind mode,
                                BudgetSemantics semantics = BudgetSemantics::TimeInclusive);

/// A placement decision with its derived per-job quantities.
struct Schedule {
  AllocationMatrix assignments;
  std::map<JobId, double> per_job_cost_gd;
  std::map<JobId, double> per_job_time_s;
  std::set<JobId> dummy_jobs;
  double total_cost_gd = 0.0;

  bool is_dummy(JobId job) const { return dummy_jobs.contains(job); }
  /// Real resource holding the whole job, if it is placed on exactly one.
  std::optional<ResourceId> sole_provider(JobId job) const;
};

/// Derives a Schedule from an allocation. A job holding any PEs on a dummy
/// resource is parked as a whole: its real entries are dropped and its full
/// demand is recorded on the dummy.
Schedule make_schedule(const AllocationMatrix& alloc, const Instance& instance);

}  // namespace metagrid

template <>
struct std::hash<metagrid::ResourceId> {
  std::size_t operator()(metagrid::ResourceId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<metagrid::JobId> {
  std::size_t operator()(metagrid::JobId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
