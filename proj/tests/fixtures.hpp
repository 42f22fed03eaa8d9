#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "metagrid/model.hpp"

namespace fixtures {

using namespace metagrid;

inline constexpr JobId kA{1};
inline constexpr JobId kB{2};
inline constexpr ResourceId kR1{1};
inline constexpr ResourceId kR2{2};

// Two resources, two jobs; B misses its deadline on R1 and the pair cannot
// share R2, so the only SGN optimum is A on R1 and B on R2 at 110 G$.
inline std::vector<ResourceInfo> s1_resources() {
  return {make_resource(kR1, 4, 100.0, 1.0), make_resource(kR2, 4, 200.0, 3.0)};
}

inline std::vector<JobRequest> s1_jobs() {
  return {make_job(kA, {1000, 1000}, 20.0, 100.0), make_job(kB, {2000, 2000, 2000}, 15.0, 200.0)};
}

struct SmallInstance {
  std::vector<JobRequest> jobs;
  std::vector<ResourceInfo> resources;
};

// Oracle-sized random instance: at most `max_jobs` jobs, `max_resources`
// resources and 20 PEs of demand. Integer rates and sizes keep costs exact.
inline SmallInstance random_small(std::uint64_t seed, JobKind kind = JobKind::Mgn, int max_jobs = 5,
                                  int max_resources = 3) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  SmallInstance out;
  const int n_resources = uniform(1, max_resources);
  for (int i = 0; i < n_resources; ++i)
    out.resources.push_back(make_resource(ResourceId{static_cast<std::uint32_t>(i + 1)}, uniform(1, 8),
                                          100.0 * uniform(1, 4), uniform(1, 6)));
  const int n_jobs = uniform(1, max_jobs);
  int demand = 0;
  for (int j = 0; j < n_jobs; ++j) {
    const int pes = std::min(uniform(1, 5), 20 - demand);
    if (pes <= 0) break;
    demand += pes;
    std::vector<double> tasks;
    for (int k = 0; k < pes; ++k) tasks.push_back(100.0 * uniform(1, 20));
    const double deadline = uniform(1, 20);
    const double budget = 5.0 * uniform(1, 60);
    out.jobs.push_back(make_job(JobId{static_cast<std::uint32_t>(j + 1)}, std::move(tasks), deadline, budget, kind));
  }
  return out;
}

}  // namespace fixtures

namespace fixtures {

// Cheapest assignment of every job, whole, to one real resource, found by
// trying all of them. nullopt when no such assignment is feasible.
inline std::optional<double> brute_force_sgn(const std::vector<JobRequest>& jobs,
                                             const std::vector<ResourceInfo>& resources,
                                             BudgetSemantics semantics = BudgetSemantics::TimeInclusive) {
  std::optional<double> best;
  std::vector<int> left;
  for (const auto& r : resources) left.push_back(r.free_pes);
  auto visit = [&](auto&& self, std::size_t j, double cost) -> void {
    if (j == jobs.size()) {
      if (!best || cost < *best) best = cost;
      return;
    }
    const auto& job = jobs[j];
    for (std::size_t i = 0; i < resources.size(); ++i) {
      const auto& r = resources[i];
      if (r.is_dummy || left[i] < job.pe_count) continue;
      if (!approx_leq(exec_time(job, r), job.deadline_s)) continue;
      if (!approx_leq(budget_usage(job, r, job.pe_count, semantics), job.budget_gd)) continue;
      left[i] -= job.pe_count;
      self(self, j + 1, cost + placement_cost(job, r, job.pe_count));
      left[i] += job.pe_count;
    }
  };
  visit(visit, 0, 0.0);
  return best;
}

}  // namespace fixtures
