#include "metagrid/mmc.hpp"

#include <algorithm>
#include <limits>

#include "metagrid/greedy.hpp"

namespace metagrid {

int JobMapping::pes_on(ResourceId resource) const {
  for (const auto& [id, pes] : provider_allocations)
    if (id == resource) return pes;
  return 0;
}

std::vector<JobMapping> job_mappings(const AllocationMatrix& alloc, const Instance& instance) {
  std::vector<JobMapping> out;
  for (const auto& job : instance.jobs()) out.push_back({job.id, {}});
  for (const auto& [key, pes] : alloc.entries()) {
    if (pes <= 0) continue;
    out[instance.job_index(key.second)].provider_allocations.emplace_back(key.first, pes);
  }
  return out;
}

MmcState::MmcState(const Instance& instance, BudgetSemantics semantics)
    : instance_(Instance::with_dummy(instance)), semantics_(semantics) {
  for (const auto& r : instance_.resources()) remaining_.push_back(r.free_pes);
}

int MmcState::remaining(ResourceId resource) const { return remaining_[instance_.resource_index(resource)]; }

bool MmcState::fits(const JobRequest& job, ResourceId resource) {
  ++work_;
  const std::size_t i = instance_.resource_index(resource);
  const auto& r = instance_.resources()[i];
  if (r.is_dummy || remaining_[i] < job.pe_count) return false;
  if (!approx_leq(exec_time(job, r), job.deadline_s)) return false;
  return approx_leq(budget_usage(job, r, job.pe_count, semantics_), job.budget_gd);
}

void MmcState::place(JobId job, ResourceId resource) {
  ++work_;
  remaining_[instance_.resource_index(resource)] -= instance_.job(job).pe_count;
  placement_[job] = resource;
}

void MmcState::park(JobId job) {
  ++work_;
  placement_[job] = std::nullopt;
}

Schedule MmcState::to_schedule() const {
  AllocationMatrix alloc;
  const ResourceId dummy = instance_.resources()[*instance_.dummy_index()].id;
  for (const auto& job : instance_.jobs()) {
    auto it = placement_.find(job.id);
    const bool real = it != placement_.end() && it->second.has_value();
    alloc.set(real ? *it->second : dummy, job.id, job.pe_count);
  }
  return make_schedule(alloc, instance_);
}

namespace {

double rate_of(const Instance& instance, ResourceId resource, JobId job) {
  return instance.resource(resource).cost_per_pe_second.rate(job);
}

void place_parked(MmcState& state) {
  const auto& instance = state.instance();
  const auto jobs = instance.jobs();
  for (std::size_t j : qos_order(jobs)) {
    const auto& job = jobs[j];
    auto where = state.placements().find(job.id);
    if (where == state.placements().end() || where->second) continue;
    std::uint64_t steps = 0;
    auto best = cheapest_fit(job, instance, state.remaining_pes(), state.semantics(), &steps);
    state.count(steps);
    if (best) state.place(job.id, instance.resources()[*best].id);
  }
}

}  // namespace

InterchangeReport interchange_capacity(ResourceId provider, const JobMapping& trigger,
                                       const std::vector<JobMapping>& displaced, MmcState& state) {
  const auto& instance = state.instance();
  InterchangeReport report{provider, trigger.job, {}};

  std::vector<const JobMapping*> order;
  for (const auto& mapping : displaced)
    if (mapping.job != trigger.job && !state.is_placed(mapping.job)) order.push_back(&mapping);
  std::sort(order.begin(), order.end(), [&](const JobMapping* a, const JobMapping* b) {
    state.count();
    const int ma = instance.job(a->job).pe_count;
    const int mb = instance.job(b->job).pe_count;
    return ma != mb ? ma < mb : a->job < b->job;
  });

  for (const JobMapping* mapping : order) {
    const auto& job = instance.job(mapping->job);
    std::optional<ResourceId> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& [alternate, pes] : trigger.provider_allocations) {
      if (alternate == provider || !state.fits(job, alternate)) continue;
      const double cost = placement_cost(job, instance.resource(alternate), job.pe_count);
      if (cost < best_cost) {
        best = alternate;
        best_cost = cost;
      }
    }
    if (best)
      state.place(job.id, *best);
    else
      state.park(job.id);
    report.moves.push_back({job.id, best});
  }
  return report;
}

MmcTrace modified_min_cost_traced(const std::vector<JobMapping>& relaxed, const Instance& base, const MmcConfig& config) {
  MmcState state(base, config.budget);
  const auto& instance = state.instance();
  MmcTrace trace;

  std::vector<JobMapping> list = relaxed;
  std::sort(list.begin(), list.end(), [&](const JobMapping& a, const JobMapping& b) {
    state.count();
    if (a.provider_count() != b.provider_count()) return a.provider_count() < b.provider_count();
    return a.job < b.job;
  });

  std::map<ResourceId, std::vector<JobMapping>> holders;
  for (const auto& mapping : list)
    for (const auto& [resource, pes] : mapping.provider_allocations) holders[resource].push_back(mapping);

  for (const auto& mapping : list) {
    state.count();
    if (state.is_placed(mapping.job)) continue;
    const auto& job = instance.job(mapping.job);

    std::vector<std::pair<ResourceId, int>> providers;
    for (const auto& entry : mapping.provider_allocations)
      if (!instance.resource(entry.first).is_dummy) providers.push_back(entry);

    if (mapping.provider_count() == 1 && providers.size() == 1) {
      if (state.fits(job, providers.front().first)) {
        state.place(job.id, providers.front().first);
        trace.frozen.insert(job.id);
      } else {
        state.park(job.id);
        trace.parked.insert(job.id);
      }
      continue;
    }

    std::sort(providers.begin(), providers.end(), [&](const auto& a, const auto& b) {
      state.count();
      if (a.second != b.second) return a.second > b.second;
      const double ra = rate_of(instance, a.first, job.id);
      const double rb = rate_of(instance, b.first, job.id);
      if (ra != rb) return ra < rb;
      return a.first < b.first;
    });

    bool placed = false;
    for (const auto& [provider, pes] : providers) {
      if (!state.fits(job, provider)) continue;
      state.place(job.id, provider);
      trace.interchanges.push_back(interchange_capacity(provider, mapping, holders[provider], state));
      placed = true;
      break;
    }
    if (!placed) {
      state.park(job.id);
      trace.parked.insert(job.id);
    }
  }
  for (const auto& report : trace.interchanges)
    for (const auto& move : report.moves)
      if (!move.to) trace.parked.insert(move.job);

  place_parked(state);
  trace.schedule = state.to_schedule();
  trace.work = state.work();
  return trace;
}

Schedule modified_min_cost(const std::vector<JobMapping>& relaxed, const Instance& instance, const MmcConfig& config) {
  return modified_min_cost_traced(relaxed, instance, config).schedule;
}

Schedule schedule_dummy_jobs(const Schedule& schedule, const Instance& base, const MmcConfig& config) {
  MmcState state(base, config.budget);
  const auto& instance = state.instance();
  for (const auto& job : instance.jobs()) {
    if (schedule.is_dummy(job.id)) {
      state.park(job.id);
    } else if (auto provider = schedule.sole_provider(job.id)) {
      state.place(job.id, *provider);
    }
  }
  place_parked(state);
  // Jobs the input left unassigned (neither placed nor parked) stay so.
  AllocationMatrix alloc;
  for (const auto& [key, pes] : schedule.assignments.entries())
    if (!schedule.is_dummy(key.second) && !schedule.sole_provider(key.second)) alloc.set(key.first, key.second, pes);
  const ResourceId dummy = instance.resources()[*instance.dummy_index()].id;
  for (const auto& [job, where] : state.placements())
    alloc.set(where ? *where : dummy, job, instance.job(job).pe_count);
  return make_schedule(alloc, instance);
}

}  // namespace metagrid
