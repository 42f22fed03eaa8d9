#include "metagrid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace metagrid {

bool approx_leq(double a, double b) { return a <= b + kTolerance * std::max(1.0, std::abs(b)); }

bool approx_eq(double a, double b) {
  return std::abs(a - b) <= kTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string to_string(ResourceId id) {
  if (id.is_dummy()) return "dummy";
  return "R" + std::to_string(id.value);
}

std::string to_string(JobId id) { return "J" + std::to_string(id.value); }

std::string to_string(JobKind kind) { return kind == JobKind::Mgn ? "MGN" : "SGN"; }

std::string to_string(BudgetSemantics semantics) {
  return semantics == BudgetSemantics::Literal ? "literal" : "time_inclusive";
}

JobKind parse_job_kind(const std::string& text) {
  if (text == "MGN" || text == "mgn") return JobKind::Mgn;
  if (text == "SGN" || text == "sgn") return JobKind::Sgn;
  throw BadConfigError("unknown job kind '" + text + "'");
}

BudgetSemantics parse_budget_semantics(const std::string& text) {
  if (text == "literal") return BudgetSemantics::Literal;
  if (text == "time_inclusive") return BudgetSemantics::TimeInclusive;
  throw BadConfigError("unknown budget semantics '" + text + "'");
}

double CostRates::rate(JobId job) const {
  auto it = overrides_.find(job);
  return it == overrides_.end() ? uniform_ : it->second;
}

double CostRates::max_rate() const {
  double best = uniform_;
  for (const auto& [job, rate] : overrides_) best = std::max(best, rate);
  return best;
}

double CostRates::min_rate() const {
  double best = uniform_;
  for (const auto& [job, rate] : overrides_) best = std::min(best, rate);
  return best;
}

CostRates CostRates::scaled(double factor) const {
  CostRates out(uniform_ * factor);
  for (const auto& [job, rate] : overrides_) out.set(job, rate * factor);
  return out;
}

double JobRequest::max_task_mi() const {
  double best = 0.0;
  for (double size : task_sizes_mi) best = std::max(best, size);
  return best;
}

JobRequest make_job(JobId id, std::vector<double> task_sizes_mi, double deadline_s, double budget_gd, JobKind kind,
                    std::uint32_t user_id, double submit_time_s) {
  JobRequest job;
  job.user_id = user_id;
  job.id = id;
  job.budget_gd = budget_gd;
  job.deadline_s = deadline_s;
  job.pe_count = static_cast<int>(task_sizes_mi.size());
  job.task_sizes_mi = std::move(task_sizes_mi);
  job.kind = kind;
  job.submit_time_s = submit_time_s;
  return job;
}

ResourceInfo make_resource(ResourceId id, int free_pes, double pe_speed_mips, double cost_rate) {
  ResourceInfo resource;
  resource.id = id;
  resource.free_pes = free_pes;
  resource.pe_speed_mips = pe_speed_mips;
  resource.cost_per_pe_second = CostRates(cost_rate);
  return resource;
}

void check_invariants(const JobRequest& job) {
  const auto where = [&] { return "job " + to_string(job.id) + ": "; };
  if (job.pe_count <= 0) throw InvalidModelError(where() + "pe_count must be positive");
  if (static_cast<std::size_t>(job.pe_count) != job.task_sizes_mi.size())
    throw InvalidModelError(where() + "pe_count differs from the number of tasks");
  if (!(job.budget_gd > 0.0)) throw InvalidModelError(where() + "budget must be positive");
  if (!(job.deadline_s > 0.0)) throw InvalidModelError(where() + "deadline must be positive");
  for (double size : job.task_sizes_mi)
    if (!(size > 0.0)) throw InvalidModelError(where() + "task sizes must be positive");
}

void check_invariants(const ResourceInfo& resource) {
  const auto where = [&] { return "resource " + to_string(resource.id) + ": "; };
  if (resource.free_pes < 0) throw InvalidModelError(where() + "free_pes must be nonnegative");
  if (!(resource.pe_speed_mips > 0.0)) throw InvalidModelError(where() + "pe speed must be positive");
  if (!(resource.cost_per_pe_second.min_rate() > 0.0)) throw InvalidModelError(where() + "cost rates must be positive");
  if (resource.is_dummy != resource.id.is_dummy())
    throw InvalidModelError(where() + "dummy flag must match the reserved dummy id");
}

double exec_time(const JobRequest& job, const ResourceInfo& resource) {
  return job.max_task_mi() / resource.pe_speed_mips;
}

double budget_usage(const JobRequest& job, const ResourceInfo& resource, int pes, BudgetSemantics semantics) {
  const double rate = resource.cost_per_pe_second.rate(job.id);
  if (semantics == BudgetSemantics::Literal) return rate * pes;
  return rate * pes * exec_time(job, resource);
}

double placement_cost(const JobRequest& job, const ResourceInfo& resource, int pes) {
  return resource.cost_per_pe_second.rate(job.id) * pes * exec_time(job, resource);
}

double qos_index(const JobRequest& job) { return job.budget_gd / (job.deadline_s * job.pe_count); }

std::vector<std::size_t> qos_order(std::span<const JobRequest> jobs) {
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double qa = qos_index(jobs[a]);
    const double qb = qos_index(jobs[b]);
    if (qa != qb) return qa > qb;
    return jobs[a].id < jobs[b].id;
  });
  return order;
}

ResourceInfo make_dummy_resource(std::span<const JobRequest> jobs, std::span<const ResourceInfo> resources) {
  double max_rate = 0.0;
  double max_speed = 0.0;
  for (const auto& r : resources) {
    if (r.is_dummy) continue;
    max_rate = std::max(max_rate, r.cost_per_pe_second.max_rate());
    max_speed = std::max(max_speed, r.pe_speed_mips);
  }
  ResourceInfo dummy;
  dummy.id = ResourceId::dummy();
  dummy.is_dummy = true;
  dummy.cost_per_pe_second = CostRates(max_rate > 0.0 ? 10.0 * max_rate : 10.0);
  dummy.pe_speed_mips = max_speed > 0.0 ? max_speed : 1.0;
  int demand = 0;
  for (const auto& j : jobs) demand += j.pe_count;
  dummy.free_pes = demand;
  return dummy;
}

Instance::Instance(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources)
    : jobs_(std::move(jobs)), resources_(std::move(resources)) {
  std::sort(jobs_.begin(), jobs_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(resources_.begin(), resources_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  for (std::size_t k = 0; k < jobs_.size(); ++k) {
    check_invariants(jobs_[k]);
    if (!job_pos_.emplace(jobs_[k].id, k).second)
      throw InvalidModelError("duplicate job id " + to_string(jobs_[k].id));
  }

  double max_real_rate = 0.0;
  for (std::size_t k = 0; k < resources_.size(); ++k) {
    const auto& r = resources_[k];
    check_invariants(r);
    if (!resource_pos_.emplace(r.id, k).second)
      throw InvalidModelError("duplicate resource id " + to_string(r.id));
    if (r.is_dummy)
      dummy_ = k;
    else
      max_real_rate = std::max(max_real_rate, r.cost_per_pe_second.max_rate());
  }
  if (dummy_ && !(resources_[*dummy_].cost_per_pe_second.min_rate() > max_real_rate))
    throw InvalidModelError("dummy cost rate must exceed every real rate");
}

Instance Instance::with_dummy(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources) {
  const bool has_dummy = std::any_of(resources.begin(), resources.end(), [](const auto& r) { return r.is_dummy; });
  if (!has_dummy) resources.push_back(make_dummy_resource(jobs, resources));
  return Instance(std::move(jobs), std::move(resources));
}

Instance Instance::with_dummy(const Instance& instance) {
  if (instance.dummy_index()) return instance;
  return with_dummy(std::vector<JobRequest>(instance.jobs_), std::vector<ResourceInfo>(instance.resources_));
}

std::optional<std::size_t> Instance::find_job(JobId id) const {
  auto it = job_pos_.find(id);
  if (it == job_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Instance::find_resource(ResourceId id) const {
  auto it = resource_pos_.find(id);
  if (it == resource_pos_.end()) return std::nullopt;
  return it->second;
}

std::size_t Instance::job_index(JobId id) const {
  auto k = find_job(id);
  if (!k) throw UnknownIdError("unknown job " + to_string(id));
  return *k;
}

std::size_t Instance::resource_index(ResourceId id) const {
  auto k = find_resource(id);
  if (!k) throw UnknownIdError("unknown resource " + to_string(id));
  return *k;
}

int Instance::total_demand() const {
  int total = 0;
  for (const auto& j : jobs_) total += j.pe_count;
  return total;
}

int AllocationMatrix::get(ResourceId resource, JobId job) const {
  auto it = entries_.find({resource, job});
  return it == entries_.end() ? 0 : it->second;
}

void AllocationMatrix::set(ResourceId resource, JobId job, int pes) {
  if (pes == 0)
    entries_.erase({resource, job});
  else
    entries_[{resource, job}] = pes;
}

void AllocationMatrix::erase_job(JobId job) {
  std::erase_if(entries_, [&](const auto& kv) { return kv.first.second == job; });
}

std::vector<std::pair<ResourceId, int>> AllocationMatrix::providers_of(JobId job) const {
  std::vector<std::pair<ResourceId, int>> out;
  for (const auto& [key, pes] : entries_)
    if (key.second == job && pes > 0) out.emplace_back(key.first, pes);
  return out;
}

int AllocationMatrix::pes_on(ResourceId resource) const {
  int total = 0;
  for (auto it = entries_.lower_bound({resource, JobId{0}}); it != entries_.end() && it->first.first == resource; ++it)
    total += it->second;
  return total;
}

double schedule_cost(const AllocationMatrix& alloc, const Instance& instance) {
  double total = 0.0;
  for (const auto& [key, pes] : alloc.entries()) {
    const auto& resource = instance.resource(key.first);
    const auto& job = instance.job(key.second);
    if (resource.is_dummy) continue;
    total += placement_cost(job, resource, pes);
  }
  return total;
}

std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Capacity: return "Capacity";
    case Violation::Kind::PeRequirement: return "PeRequirement";
    case Violation::Kind::SplitSgnJob: return "SplitSgnJob";
    case Violation::Kind::MultipleResources: return "MultipleResources";
    case Violation::Kind::Budget: return "Budget";
    case Violation::Kind::Deadline: return "Deadline";
    case Violation::Kind::Negative: return "Negative";
  }
  return "?";
}

namespace {

std::string describe(double actual, double limit) {
  std::ostringstream out;
  out << actual << " > " << limit;
  return out.str();
}

}  // namespace

std::vector<Violation> validate(const AllocationMatrix& alloc, const Instance& instance, JobKind mode,
                                BudgetSemantics semantics) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  const auto jobs = instance.jobs();
  const auto resources = instance.resources();

  std::vector<int> used(resources.size(), 0);
  std::vector<int> assigned(jobs.size(), 0);
  std::vector<int> positive_entries(jobs.size(), 0);
  std::vector<double> spent(jobs.size(), 0.0);

  for (const auto& [key, pes] : alloc.entries()) {
    const std::size_t ri = instance.resource_index(key.first);
    const std::size_t ji = instance.job_index(key.second);
    const auto& resource = resources[ri];
    const auto& job = jobs[ji];
    if (pes < 0) {
      out.push_back({Kind::Negative, key.first, key.second, std::to_string(pes) + " PEs"});
      continue;
    }
    used[ri] += pes;
    assigned[ji] += pes;
    ++positive_entries[ji];
    if (mode == JobKind::Sgn && pes != job.pe_count)
      out.push_back({Kind::SplitSgnJob, key.first, key.second,
                     std::to_string(pes) + " of " + std::to_string(job.pe_count) + " PEs"});
    if (resource.is_dummy) continue;
    spent[ji] += budget_usage(job, resource, pes, semantics);
    const double t = exec_time(job, resource);
    if (!approx_leq(t, job.deadline_s)) out.push_back({Kind::Deadline, key.first, key.second, describe(t, job.deadline_s)});
  }

  for (std::size_t ri = 0; ri < resources.size(); ++ri)
    if (used[ri] > resources[ri].free_pes)
      out.push_back({Kind::Capacity, resources[ri].id, std::nullopt,
                     std::to_string(used[ri]) + " > " + std::to_string(resources[ri].free_pes)});

  for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
    const auto& job = jobs[ji];
    if (assigned[ji] != job.pe_count)
      out.push_back({Kind::PeRequirement, std::nullopt, job.id,
                     std::to_string(assigned[ji]) + " != " + std::to_string(job.pe_count)});
    if (mode == JobKind::Sgn && positive_entries[ji] > 1)
      out.push_back({Kind::MultipleResources, std::nullopt, job.id, std::to_string(positive_entries[ji]) + " resources"});
    if (!approx_leq(spent[ji], job.budget_gd))
      out.push_back({Kind::Budget, std::nullopt, job.id, describe(spent[ji], job.budget_gd)});
  }
  return out;
}

std::optional<ResourceId> Schedule::sole_provider(JobId job) const {
  if (dummy_jobs.contains(job)) return std::nullopt;
  auto providers = assignments.providers_of(job);
  if (providers.size() != 1) return std::nullopt;
  return providers.front().first;
}

Schedule make_schedule(const AllocationMatrix& alloc, const Instance& instance) {
  Schedule schedule;
  for (const auto& [key, pes] : alloc.entries()) {
    instance.job_index(key.second);
    if (pes > 0 && instance.resource(key.first).is_dummy) schedule.dummy_jobs.insert(key.second);
  }
  for (const auto& [key, pes] : alloc.entries()) {
    if (schedule.dummy_jobs.contains(key.second)) continue;
    schedule.assignments.set(key.first, key.second, pes);
  }
  for (JobId job : schedule.dummy_jobs) {
    const auto& dummy = instance.resources()[*instance.dummy_index()];
    schedule.assignments.set(dummy.id, job, instance.job(job).pe_count);
  }
  for (const auto& [key, pes] : schedule.assignments.entries()) {
    const auto& resource = instance.resource(key.first);
    if (resource.is_dummy) continue;
    const auto& job = instance.job(key.second);
    schedule.per_job_cost_gd[key.second] += placement_cost(job, resource, pes);
    auto& t = schedule.per_job_time_s[key.second];
    t = std::max(t, exec_time(job, resource));
  }
  for (const auto& [job, cost] : schedule.per_job_cost_gd) schedule.total_cost_gd += cost;
  return schedule;
}

}  // namespace metagrid
