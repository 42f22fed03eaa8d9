#include "metagrid/relaxed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "transport.hpp"

namespace metagrid {
namespace {

std::string number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string var_name(const FeasiblePair& pair) { return "r_" + to_string(pair.resource) + "_" + to_string(pair.job); }

std::vector<FeasiblePair> collect_pairs(const Instance& instance, BudgetSemantics semantics) {
  std::vector<FeasiblePair> pairs;
  const auto jobs = instance.jobs();
  const auto resources = instance.resources();
  for (std::size_t ri = 0; ri < resources.size(); ++ri) {
    const auto& resource = resources[ri];
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
      const auto& job = jobs[ji];
      FeasiblePair pair;
      pair.resource = resource.id;
      pair.job = job.id;
      pair.resource_index = ri;
      pair.job_index = ji;
      pair.cost_coeff = placement_cost(job, resource, 1);
      pair.upper = std::min(resource.free_pes, job.pe_count);
      if (resource.is_dummy) {
        pair.budget_coeff = 0.0;
      } else {
        if (!approx_leq(exec_time(job, resource), job.deadline_s)) continue;
        pair.budget_coeff = budget_usage(job, resource, 1, semantics);
        if (!approx_leq(pair.budget_coeff, job.budget_gd)) continue;
      }
      pairs.push_back(pair);
    }
  }
  return pairs;
}

detail::TransportProblem to_transport(const Instance& instance, std::span<const FeasiblePair> pairs) {
  detail::TransportProblem problem;
  for (const auto& job : instance.jobs()) {
    problem.demand.push_back(job.pe_count);
    problem.budget_limit.push_back(job.budget_gd);
  }
  for (const auto& resource : instance.resources()) problem.capacity.push_back(resource.free_pes);
  for (const auto& pair : pairs) {
    problem.vars.push_back({static_cast<int>(pair.job_index), static_cast<int>(pair.resource_index), pair.cost_coeff,
                            pair.budget_coeff, pair.upper});
  }
  return problem;
}

// The real grid cannot serve every job within its deadline and budget.
bool needs_dummy(const Instance& instance, std::span<const FeasiblePair> pairs) {
  const auto jobs = instance.jobs();
  std::vector<int> reachable(jobs.size(), 0);
  for (const auto& pair : pairs) reachable[pair.job_index] += pair.upper;
  for (std::size_t ji = 0; ji < jobs.size(); ++ji)
    if (reachable[ji] < jobs[ji].pe_count) return true;
  int supply = 0;
  for (const auto& r : instance.resources()) supply += r.free_pes;
  if (instance.total_demand() > supply) return true;
  return !detail::find_feasible(to_transport(instance, pairs)).has_value();
}

}  // namespace

std::set<std::pair<ResourceId, JobId>> RelaxedModel::feasible_pairs() const {
  std::set<std::pair<ResourceId, JobId>> out;
  for (const auto& pair : pairs_) out.emplace(pair.resource, pair.job);
  return out;
}

std::optional<double> RelaxedModel::cost_coeff(ResourceId resource, JobId job) const {
  for (const auto& pair : pairs_)
    if (pair.resource == resource && pair.job == job) return pair.cost_coeff;
  return std::nullopt;
}

double RelaxedModel::objective(const AllocationMatrix& alloc) const {
  double total = 0.0;
  for (const auto& [key, pes] : alloc.entries())
    total += placement_cost(instance_.job(key.second), instance_.resource(key.first), pes);
  return total;
}

std::string RelaxedModel::to_lp_text() const {
  std::ostringstream out;
  out << "min:";
  for (const auto& pair : pairs_) out << " +" << number(pair.cost_coeff) << ' ' << var_name(pair);
  out << ";\nst:\n";
  for (const auto& resource : instance_.resources()) {
    out << "cap_" << to_string(resource.id) << ':';
    for (const auto& pair : pairs_)
      if (pair.resource == resource.id) out << " +" << var_name(pair);
    out << " <= " << resource.free_pes << ";\n";
  }
  for (const auto& job : instance_.jobs()) {
    out << "pe_" << to_string(job.id) << ':';
    for (const auto& pair : pairs_)
      if (pair.job == job.id) out << " +" << var_name(pair);
    out << " = " << job.pe_count << ";\n";
  }
  for (const auto& job : instance_.jobs()) {
    out << "budget_" << to_string(job.id) << ':';
    for (const auto& pair : pairs_)
      if (pair.job == job.id && pair.budget_coeff > 0.0) out << " +" << number(pair.budget_coeff) << ' ' << var_name(pair);
    out << " <= " << number(job.budget_gd) << ";\n";
  }
  out << "int";
  for (std::size_t k = 0; k < pairs_.size(); ++k) out << (k ? ", " : " ") << var_name(pairs_[k]);
  out << ";\n";
  return out.str();
}

RelaxedModel build_relaxed(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources,
                           const RelaxedConfig& config) {
  if (resources.empty() && !config.allow_dummy) throw EmptyGridError("no resources and the dummy is disabled");

  RelaxedModel model;
  model.budget_ = config.budget;
  model.instance_ = Instance(jobs, resources);
  model.pairs_ = collect_pairs(model.instance_, config.budget);

  if (config.allow_dummy && !model.has_dummy() && !jobs.empty() && needs_dummy(model.instance_, model.pairs_)) {
    resources.push_back(make_dummy_resource(jobs, resources));
    model.instance_ = Instance(std::move(jobs), std::move(resources));
    model.pairs_ = collect_pairs(model.instance_, config.budget);
  }
  return model;
}

AllocationMatrix solve_relaxed(const RelaxedModel& model, SolverStats* stats) {
  const auto pairs = model.pairs();
  detail::TransportStats transport_stats;
  auto solution = detail::solve_transport(to_transport(model.instance(), pairs), &transport_stats);
  if (stats) {
    stats->nodes = transport_stats.nodes;
    stats->flow_solves = transport_stats.flow_solves;
    stats->root_tight = transport_stats.root_tight;
    stats->unique = transport_stats.unique;
  }
  if (!solution) throw InfeasibleError("no allocation satisfies capacity, demand and budget rows");
  AllocationMatrix alloc;
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if ((*solution)[k] > 0) alloc.set(pairs[k].resource, pairs[k].job, (*solution)[k]);
  return alloc;
}

namespace {

// Depth-first over jobs; within a job, over the split of its PEs across its
// pairs. Partial costs only grow, so a branch already dearer than the best
// complete allocation is cut.
class Enumerator {
 public:
  explicit Enumerator(const RelaxedModel& model) : model_(model) {
    const auto& instance = model.instance();
    job_pairs_.resize(instance.jobs().size());
    const auto pairs = model.pairs();
    for (std::size_t k = 0; k < pairs.size(); ++k) job_pairs_[pairs[k].job_index].push_back(k);
    for (const auto& r : instance.resources()) remaining_.push_back(r.free_pes);
    current_.assign(pairs.size(), 0);
  }

  std::optional<std::vector<int>> run() {
    visit_job(0, 0.0);
    return best_;
  }

 private:
  void visit_job(std::size_t ji, double cost) {
    if (ji == job_pairs_.size()) {
      consider(cost);
      return;
    }
    split(ji, 0, model_.instance().jobs()[ji].pe_count, cost, 0.0);
  }

  void split(std::size_t ji, std::size_t slot, int left, double cost, double spent) {
    if (best_ && cost > best_cost_ + tolerance(best_cost_)) return;
    const auto& list = job_pairs_[ji];
    if (slot == list.size()) {
      const auto& job = model_.instance().jobs()[ji];
      if (left == 0 && approx_leq(spent, job.budget_gd)) visit_job(ji + 1, cost);
      return;
    }
    const auto& pair = model_.pairs()[list[slot]];
    const int limit = std::min({left, pair.upper, remaining_[pair.resource_index]});
    for (int take = 0; take <= limit; ++take) {
      current_[list[slot]] = take;
      remaining_[pair.resource_index] -= take;
      split(ji, slot + 1, left - take, cost + take * pair.cost_coeff, spent + take * pair.budget_coeff);
      remaining_[pair.resource_index] += take;
    }
    current_[list[slot]] = 0;
  }

  void consider(double cost) {
    if (!best_ || cost < best_cost_ - tolerance(best_cost_) ||
        (std::abs(cost - best_cost_) <= tolerance(best_cost_) && current_ < *best_)) {
      best_ = current_;
      best_cost_ = cost;
    }
  }

  static double tolerance(double reference) { return 1e-9 * std::max(1.0, std::abs(reference)); }

  const RelaxedModel& model_;
  std::vector<std::vector<std::size_t>> job_pairs_;
  std::vector<int> remaining_;
  std::vector<int> current_;
  std::optional<std::vector<int>> best_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

}  // namespace

AllocationMatrix brute_force_relaxed(const RelaxedModel& model) {
  const auto& instance = model.instance();
  if (instance.total_demand() > 20 || instance.resources().size() > 4)
    throw TooLargeError("brute force is limited to 20 PEs of demand and 4 resources");
  auto best = Enumerator(model).run();
  if (!best) throw InfeasibleError("no allocation satisfies capacity, demand and budget rows");
  AllocationMatrix alloc;
  const auto pairs = model.pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if ((*best)[k] > 0) alloc.set(pairs[k].resource, pairs[k].job, (*best)[k]);
  return alloc;
}

}  // namespace metagrid
