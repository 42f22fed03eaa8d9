#include "metagrid/greedy.hpp"

namespace metagrid {

std::optional<std::size_t> cheapest_fit(const JobRequest& job, const Instance& instance, std::span<const int> remaining,
                                        BudgetSemantics semantics, std::uint64_t* work) {
  const auto resources = instance.resources();
  std::optional<std::size_t> best;
  double best_rate = 0.0;
  double best_cost = 0.0;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    if (work) ++*work;
    const auto& r = resources[i];
    if (r.is_dummy || remaining[i] < job.pe_count) continue;
    if (!approx_leq(exec_time(job, r), job.deadline_s)) continue;
    if (!approx_leq(budget_usage(job, r, job.pe_count, semantics), job.budget_gd)) continue;
    const double rate = r.cost_per_pe_second.rate(job.id);
    const double cost = placement_cost(job, r, job.pe_count);
    if (!best || rate < best_rate || (rate == best_rate && cost < best_cost)) {
      best = i;
      best_rate = rate;
      best_cost = cost;
    }
  }
  return best;
}

Schedule greedy_schedule(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources, const GreedyConfig& config) {
  return greedy_schedule(Instance::with_dummy(std::move(jobs), std::move(resources)), config);
}

Schedule greedy_schedule(const Instance& base, const GreedyConfig& config) {
  const Instance instance = Instance::with_dummy(base);
  const auto resources = instance.resources();
  const auto jobs = instance.jobs();
  std::vector<int> remaining;
  for (const auto& r : resources) remaining.push_back(r.free_pes);

  AllocationMatrix alloc;
  const ResourceId dummy = resources[*instance.dummy_index()].id;
  for (std::size_t j : qos_order(jobs)) {
    const auto& job = jobs[j];
    if (auto i = cheapest_fit(job, instance, remaining, config.budget)) {
      remaining[*i] -= job.pe_count;
      alloc.set(resources[*i].id, job.id, job.pe_count);
    } else {
      alloc.set(dummy, job.id, job.pe_count);
    }
  }
  return make_schedule(alloc, instance);
}

}  // namespace metagrid
