#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "metagrid/simulator.hpp"

using namespace metagrid;
using namespace fixtures;

namespace {

SimulationOptions quick_options() {
  SimulationOptions o;
  o.ga.population_size = 20;
  o.ga.max_iterations = 100;
  o.ga.convergence_window = 10;
  return o;
}

}  // namespace

TEST_CASE("scheduler names") {
  for (Scheduler s : all_schedulers()) CHECK(parse_scheduler(to_string(s)) == s);
  CHECK(parse_scheduler("relaxed-mgn") == Scheduler::RelaxedMgn);
  CHECK_THROWS_AS(parse_scheduler("fifo"), UnknownSchedulerError);
  CHECK(all_schedulers().size() == 5);
}

TEST_CASE("single job completes under every scheduler") {
  // 2 PEs x 5 s x 2 G$/s
  const std::vector<ResourceInfo> grid = {make_resource(ResourceId{1}, 4, 100.0, 2.0)};
  const std::vector<JobRequest> jobs = {make_job(JobId{1}, {500, 500}, 120.0, 100.0, JobKind::Sgn, 1, 3.0)};
  for (Scheduler s : all_schedulers()) {
    CAPTURE(to_string(s));
    const auto m = simulate(jobs, grid, s, quick_options());
    CHECK(m.jobs_completed == 1);
    CHECK(m.tasks_completed == 2);
    CHECK(m.jobs_missed == 0);
    CHECK(m.jobs_queued == 0);
    CHECK(m.total_cost_gd == doctest::Approx(20.0));
    CHECK(m.rollover_count == std::vector<int>{0});
    if (s != Scheduler::Hga && s != Scheduler::Lpga) CHECK(m.ga_iterations == 0);
  }
}

TEST_CASE("S1 period decision under lpga") {
  const auto d = schedule_period(Scheduler::Lpga, s1_jobs(), s1_resources(), quick_options(), 1);
  CHECK(d.schedule.total_cost_gd == doctest::Approx(110.0));
  CHECK(d.schedule.sole_provider(kA) == kR1);
  CHECK(d.schedule.sole_provider(kB) == kR2);
  CHECK(d.ga_iterations > 0);
}

TEST_CASE("S1 batch simulated under lpga") {
  auto options = quick_options();
  // A period boundary right after submission keeps the deadlines intact.
  options.schedule_interval_s = 0.001;
  const auto m = simulate(s1_jobs(), s1_resources(), Scheduler::Lpga, options);
  CHECK(m.jobs_completed == 2);
  CHECK(m.tasks_completed == 5);
  CHECK(m.total_cost_gd == doctest::Approx(110.0));
}

TEST_CASE("jobs past their deadline before the first period are missed") {
  const auto m = simulate(s1_jobs(), s1_resources(), Scheduler::Greedy);
  CHECK(m.jobs_completed == 0);
  CHECK(m.jobs_missed == 2);
  CHECK(m.total_cost_gd == 0.0);
}

TEST_CASE("parked job rolls over once and completes") {
  // Both jobs need the whole resource for 10 s. The period at 50 s places one
  // and parks the other, which runs at 100 s.
  const std::vector<ResourceInfo> grid = {make_resource(ResourceId{1}, 4, 100.0, 1.0)};
  const std::vector<JobRequest> jobs = {
      make_job(JobId{1}, {1000, 1000, 1000, 1000}, 200.0, 1000.0, JobKind::Sgn, 1, 0.0),
      make_job(JobId{2}, {1000, 1000, 1000, 1000}, 200.0, 1000.0, JobKind::Sgn, 2, 1.0)};
  for (Scheduler s : all_schedulers()) {
    CAPTURE(to_string(s));
    std::ostringstream log;
    auto options = quick_options();
    options.log = &log;
    const auto m = simulate(jobs, grid, s, options);
    CHECK(m.jobs_completed == 2);
    CHECK(m.rollover_count == std::vector<int>{1, 0});
    CHECK(m.total_cost_gd == doctest::Approx(80.0));
    const std::string text = log.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find("\"period\":1") != std::string::npos);
  }
}

TEST_CASE("parked job whose deadline passes during the period is missed") {
  const std::vector<ResourceInfo> grid = {make_resource(ResourceId{1}, 4, 100.0, 1.0)};
  const std::vector<JobRequest> jobs = {
      make_job(JobId{1}, {1000, 1000, 1000, 1000}, 200.0, 10000.0, JobKind::Sgn, 1, 0.0),
      make_job(JobId{2}, {1000, 1000, 1000, 1000}, 65.0, 100.0, JobKind::Sgn, 2, 1.0)};
  // Job 1 has the higher QoS index and takes the resource; job 2 is parked
  // and its deadline at 66 s passes before the next period.
  const auto m = simulate(jobs, grid, Scheduler::Greedy);
  CHECK(m.jobs_completed == 1);
  CHECK(m.jobs_missed == 1);
  CHECK(m.rollover_count == std::vector<int>{0});
}

TEST_CASE("rollover") {
  const std::vector<ResourceInfo> grid = {make_resource(ResourceId{1}, 4, 100.0, 1.0)};
  const std::vector<JobRequest> queue = {make_job(JobId{1}, {1000}, 100.0, 100.0, JobKind::Sgn, 1, 0.0),
                                         make_job(JobId{2}, {1000}, 100.0, 100.0, JobKind::Sgn, 2, 5.0),
                                         make_job(JobId{3}, {1000}, 60.0, 100.0, JobKind::Sgn, 3, 5.0)};
  const auto instance = Instance::with_dummy(queue, grid);
  const ResourceId dummy = instance.resources().back().id;

  SUBCASE("nothing parked") {
    AllocationMatrix alloc;
    for (const auto& job : queue) alloc.set(ResourceId{1}, job.id, 1);
    const auto out = rollover(queue, make_schedule(alloc, instance), 50.0);
    CHECK(out.queue.empty());
    CHECK(out.missed.empty());
  }
  SUBCASE("parked jobs with and without slack left") {
    AllocationMatrix alloc;
    alloc.set(ResourceId{1}, JobId{1}, 1);
    alloc.set(dummy, JobId{2}, 1);
    alloc.set(dummy, JobId{3}, 1);
    const auto out = rollover(queue, make_schedule(alloc, instance), 100.0);
    REQUIRE(out.queue.size() == 1);
    CHECK(out.queue.front().id == JobId{2});
    // Deadlines stay measured from submission.
    CHECK(out.queue.front().deadline_s == 100.0);
    REQUIRE(out.missed.size() == 1);
    CHECK(out.missed.front().id == JobId{3});
  }
}

TEST_CASE("empty inputs") {
  const auto none = simulate({}, s1_resources(), Scheduler::Mmc);
  CHECK(none.jobs_submitted == 0);
  CHECK(none.rollover_count.empty());

  const std::vector<JobRequest> jobs = {make_job(JobId{1}, {100}, 500.0, 100.0, JobKind::Sgn, 1, 0.0)};
  for (Scheduler s : all_schedulers()) {
    CAPTURE(to_string(s));
    const auto m = simulate(jobs, {}, s, quick_options());
    CHECK(m.jobs_completed == 0);
    CHECK(m.jobs_missed == 1);
  }
}

TEST_CASE("duplicate job ids are rejected") {
  const std::vector<JobRequest> jobs = {make_job(JobId{1}, {100}, 500.0, 100.0), make_job(JobId{1}, {100}, 500.0, 100.0)};
  CHECK_THROWS_AS(simulate(jobs, s1_resources(), Scheduler::Greedy), InvalidModelError);
}

TEST_CASE("simulation is deterministic") {
  ScenarioConfig c;
  c.resource_count = 6;
  c.job_count = 12;
  c.rng_seed = 9;
  GaParams ga = quick_options().ga;
  for (Scheduler s : {Scheduler::Hga, Scheduler::Lpga}) {
    const auto a = run_scenario(c, s, ga);
    const auto b = run_scenario(c, s, ga);
    CHECK(a.total_cost_gd == b.total_cost_gd);
    CHECK(a.ga_iterations == b.ga_iterations);
    CHECK(a.rollover_count == b.rollover_count);
  }
}

TEST_CASE("harness invariants hold for every scheduler") {
  // simulate throws on any breach of capacity, deadline or conservation.
  GaParams ga = quick_options().ga;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    ScenarioConfig c;
    c.rng_seed = seed;
    c.resource_count = 2 + static_cast<int>(seed % 5);
    c.job_count = 6 + static_cast<int>(seed % 7);
    c.deadline_mode = static_cast<DeadlineMode>(seed % 3);
    c.budget = seed % 2 ? BudgetSemantics::Literal : BudgetSemantics::TimeInclusive;
    c.runtime_mean_s = 60.0;
    c.slack_tight_s = 20.0;
    c.slack_medium_s = 80.0;
    c.slack_relaxed_s = 200.0;
    for (Scheduler s : all_schedulers()) {
      CAPTURE(seed);
      CAPTURE(to_string(s));
      ScenarioMetrics m;
      REQUIRE_NOTHROW(m = run_scenario(c, s, ga));
      CHECK(m.jobs_completed + m.jobs_missed + m.jobs_queued == c.job_count);
      CHECK(m.total_cost_gd >= 0.0);
      CHECK(m.jobs_queued == 0);
    }
  }
}

TEST_CASE("tight deadlines on a small grid leave jobs unfinished") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ScenarioConfig c;
    c.rng_seed = seed;
    c.deadline_mode = DeadlineMode::Tight;
    CAPTURE(seed);
    CHECK(run_scenario(c, Scheduler::Greedy).jobs_completed < 50);
  }
}
