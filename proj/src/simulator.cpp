#include "metagrid/simulator.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include "json.hpp"
#include "metagrid/greedy.hpp"
#include "metagrid/mmc.hpp"
#include "metagrid/relaxed.hpp"

namespace metagrid {

std::string to_string(Scheduler scheduler) {
  switch (scheduler) {
    case Scheduler::Greedy: return "greedy";
    case Scheduler::Mmc: return "mmc";
    case Scheduler::Hga: return "hga";
    case Scheduler::Lpga: return "lpga";
    case Scheduler::RelaxedMgn: return "relaxed-mgn";
  }
  return "?";
}

Scheduler parse_scheduler(const std::string& text) {
  for (Scheduler s : all_schedulers())
    if (to_string(s) == text) return s;
  throw UnknownSchedulerError("unknown scheduler '" + text + "'");
}

const std::vector<Scheduler>& all_schedulers() {
  static const std::vector<Scheduler> list = {Scheduler::Greedy, Scheduler::Mmc, Scheduler::Hga, Scheduler::Lpga,
                                              Scheduler::RelaxedMgn};
  return list;
}

PeriodDecision schedule_period(Scheduler scheduler, std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources,
                               const SimulationOptions& options, std::uint64_t period_seed) {
  PeriodDecision out;
  switch (scheduler) {
    case Scheduler::Greedy: {
      out.instance = Instance::with_dummy(std::move(jobs), std::move(resources));
      out.schedule = greedy_schedule(out.instance, {options.budget});
      break;
    }
    case Scheduler::Mmc: {
      const auto model = build_relaxed(std::move(jobs), std::move(resources), {options.budget, true});
      const auto relaxed = solve_relaxed(model);
      out.instance = Instance::with_dummy(model.instance());
      out.schedule = modified_min_cost(job_mappings(relaxed, model.instance()), out.instance, {options.budget});
      break;
    }
    case Scheduler::Hga:
    case Scheduler::Lpga: {
      GaParams params = options.ga;
      params.rng_seed = period_seed;
      out.instance = Instance::with_dummy(jobs, resources);
      EvolutionConfig config{options.budget, true};
      auto result = scheduler == Scheduler::Lpga ? lpga(std::move(jobs), std::move(resources), params, config)
                                                 : hga(std::move(jobs), std::move(resources), params, config);
      out.schedule = std::move(result.schedule);
      out.ga_iterations = result.ga.iterations_used;
      break;
    }
    case Scheduler::RelaxedMgn: {
      for (auto& job : jobs) job.kind = JobKind::Mgn;
      const auto model = build_relaxed(std::move(jobs), std::move(resources), {options.budget, true});
      out.instance = Instance::with_dummy(model.instance());
      out.schedule = make_schedule(solve_relaxed(model), out.instance);
      break;
    }
  }
  return out;
}

RolloverResult rollover(const std::vector<JobRequest>& queue, const Schedule& schedule, double next_period_s) {
  RolloverResult out;
  for (const auto& job : queue) {
    if (!schedule.is_dummy(job.id)) continue;
    if (job.submit_time_s + job.deadline_s <= next_period_s)
      out.missed.push_back(job);
    else
      out.queue.push_back(job);
  }
  return out;
}

namespace {

using Millis = std::int64_t;

Millis to_millis(double seconds) { return static_cast<Millis>(std::llround(seconds * 1000.0)); }
// Occupancy rounds up so a PE is never handed out before its job is done.
Millis duration_millis(double seconds) { return static_cast<Millis>(std::ceil(seconds * 1000.0 - 1e-6)); }

enum class EventType { Release = 0, Submit = 1, Schedule = 2 };

struct Event {
  Millis time = 0;
  EventType type = EventType::Schedule;
  std::uint32_t job = 0;
  std::size_t resource = 0;
  int pes = 0;

  bool operator>(const Event& other) const {
    return std::tie(time, type, job, resource) > std::tie(other.time, other.type, other.job, other.resource);
  }
};

void fail(const std::string& what) { throw Error("simulation invariant broken: " + what); }

std::uint64_t period_seed(std::uint64_t base, int period) {
  std::seed_seq seq{base, static_cast<std::uint64_t>(period), std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  return rng();
}

std::vector<std::uint32_t> ids(const std::vector<JobRequest>& jobs) {
  std::vector<std::uint32_t> out;
  for (const auto& job : jobs) out.push_back(job.id.value);
  return out;
}

}  // namespace

ScenarioMetrics simulate(const std::vector<JobRequest>& jobs, const std::vector<ResourceInfo>& resources,
                         Scheduler scheduler, const SimulationOptions& options) {
  const Instance grid({}, resources);
  const auto sorted = grid.resources();
  std::vector<int> free;
  for (const auto& r : sorted) free.push_back(r.free_pes);
  std::map<JobId, JobRequest> by_id;
  for (const auto& job : jobs) {
    check_invariants(job);
    if (!by_id.emplace(job.id, job).second) throw InvalidModelError("duplicate job id " + to_string(job.id));
  }

  ScenarioMetrics metrics;
  metrics.jobs_submitted = static_cast<int>(jobs.size());
  const Millis interval = to_millis(options.schedule_interval_s);
  if (interval <= 0) throw BadConfigError("schedule interval must be positive");

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (const auto& job : jobs) events.push({to_millis(job.submit_time_s), EventType::Submit, job.id.value, 0, 0});
  if (!jobs.empty()) events.push({interval, EventType::Schedule, 0, 0, 0});

  int unsubmitted = static_cast<int>(jobs.size());
  std::vector<JobRequest> queue;
  std::map<JobId, int> outstanding;
  std::map<JobId, double> finish_s;
  int period = 0;
  const JobKind mode = scheduler == Scheduler::RelaxedMgn ? JobKind::Mgn : JobKind::Sgn;

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    const double now_s = ev.time / 1000.0;

    if (ev.type == EventType::Release) {
      free[ev.resource] += ev.pes;
      if (options.check_invariants && free[ev.resource] > sorted[ev.resource].free_pes)
        fail("resource " + to_string(sorted[ev.resource].id) + " released more PEs than it has");
      const JobId id{ev.job};
      if (--outstanding[id] == 0) {
        const auto& job = by_id.at(id);
        ++metrics.jobs_completed;
        metrics.tasks_completed += job.pe_count;
        if (options.check_invariants && !approx_leq(finish_s[id], job.submit_time_s + job.deadline_s))
          fail("job " + to_string(id) + " finished after its deadline");
      }
      continue;
    }
    if (ev.type == EventType::Submit) {
      queue.push_back(by_id.at(JobId{ev.job}));
      --unsubmitted;
      continue;
    }

    ++period;
    std::vector<JobRequest> expired;
    std::erase_if(queue, [&](const JobRequest& job) {
      if (job.submit_time_s + job.deadline_s > now_s) return false;
      expired.push_back(job);
      return true;
    });
    metrics.jobs_missed += static_cast<int>(expired.size());

    std::vector<JobRequest> placed_jobs;
    std::vector<JobRequest> rolled;
    double period_cost = 0.0;
    const double next_s = now_s + options.schedule_interval_s;
    if (!queue.empty()) {
      std::vector<JobRequest> pending = queue;
      for (auto& job : pending) job.deadline_s = job.submit_time_s + job.deadline_s - now_s;
      std::vector<ResourceInfo> snapshot(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < snapshot.size(); ++i) snapshot[i].free_pes = free[i];

      const auto start = std::chrono::steady_clock::now();
      auto decision = schedule_period(scheduler, std::move(pending), std::move(snapshot), options,
                                      period_seed(options.seed, period));
      metrics.wall_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      metrics.ga_iterations += decision.ga_iterations;

      if (options.check_invariants) {
        const auto violations = validate(decision.schedule.assignments, decision.instance, mode, options.budget);
        if (!violations.empty())
          fail(to_string(scheduler) + " emitted an infeasible schedule (" + to_string(violations.front().kind) + ": " +
               violations.front().detail + ")");
      }

      const Millis now_ms = ev.time;
      for (const auto& job : queue) {
        if (decision.schedule.is_dummy(job.id)) continue;
        const auto providers = decision.schedule.assignments.providers_of(job.id);
        if (providers.empty()) fail("job " + to_string(job.id) + " was neither placed nor parked");
        double finish = now_s;
        for (const auto& [resource, pes] : providers) {
          const std::size_t i = grid.resource_index(resource);
          free[i] -= pes;
          if (options.check_invariants && free[i] < 0) fail("resource " + to_string(resource) + " overcommitted");
          const double run_s = exec_time(job, sorted[i]);
          finish = std::max(finish, now_s + run_s);
          events.push({now_ms + duration_millis(run_s), EventType::Release, job.id.value, i, pes});
          ++outstanding[job.id];
        }
        finish_s[job.id] = finish;
        period_cost += decision.schedule.per_job_cost_gd[job.id];
        placed_jobs.push_back(job);
      }
      metrics.total_cost_gd += period_cost;

      auto next = rollover(queue, decision.schedule, next_s);
      metrics.jobs_missed += static_cast<int>(next.missed.size());
      expired.insert(expired.end(), next.missed.begin(), next.missed.end());
      rolled = next.queue;
      queue = std::move(next.queue);
    }
    metrics.rollover_count.push_back(static_cast<int>(rolled.size()));

    if (options.log) {
      nlohmann::json line = {{"period", period},           {"time_s", now_s},
                             {"scheduler", to_string(scheduler)}, {"scheduled", ids(placed_jobs)},
                             {"rolled_over", ids(rolled)}, {"missed", ids(expired)},
                             {"cost_gd", period_cost}};
      *options.log << line.dump() << '\n';
    }

    if ((!queue.empty() || unsubmitted > 0) && period < options.max_periods)
      events.push({ev.time + interval, EventType::Schedule, 0, 0, 0});
  }

  metrics.jobs_queued = static_cast<int>(queue.size());
  if (options.check_invariants) {
    if (metrics.jobs_completed + metrics.jobs_missed + metrics.jobs_queued != metrics.jobs_submitted)
      fail("jobs were lost or double counted");
    for (std::size_t i = 0; i < free.size(); ++i)
      if (free[i] != sorted[i].free_pes) fail("resource " + to_string(sorted[i].id) + " did not get all PEs back");
  }
  return metrics;
}

ScenarioMetrics run_scenario(const ScenarioConfig& config, Scheduler scheduler, const GaParams& ga, std::ostream* log) {
  const auto workload = generate_workload(config);
  SimulationOptions options;
  options.budget = config.budget;
  options.ga = ga;
  options.schedule_interval_s = config.schedule_interval_s;
  options.seed = config.rng_seed;
  options.log = log;
  return simulate(workload.jobs, workload.resources, scheduler, options);
}

}  // namespace metagrid
