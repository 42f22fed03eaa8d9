#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "metagrid/workload.hpp"

using namespace metagrid;

namespace {

// Every random spread switched off, so each job sits at the configured means.
ScenarioConfig flat_config() {
  ScenarioConfig c;
  c.job_count = 3;
  c.task_variation_min = c.task_variation_max = 0.0;
  c.runtime_variation = 0.0;
  c.slack_variation = 0.0;
  c.deadline_mode = DeadlineMode::Tight;
  return c;
}

}  // namespace

TEST_CASE("budget and deadline at the means") {
  const auto w = generate_workload(flat_config());
  REQUIRE(w.jobs.size() == 3);
  for (const auto& job : w.jobs) {
    CHECK(job.pe_count == 5);
    CHECK(job.budget_gd == doctest::Approx(18000.0));
    CHECK(job.deadline_s == doctest::Approx(450.0));
    CHECK(job.task_sizes_mi.front() == doctest::Approx(400.0 * 500.0));
    CHECK(job.user_id == job.id.value);
  }
}

TEST_CASE("deadline slack by mode") {
  auto c = flat_config();
  c.deadline_mode = DeadlineMode::Medium;
  CHECK(generate_workload(c).jobs.front().deadline_s == doctest::Approx(650.0));
  c.deadline_mode = DeadlineMode::Relaxed;
  CHECK(generate_workload(c).jobs.front().deadline_s == doctest::Approx(900.0));
  CHECK(parse_deadline_mode("relaxed") == DeadlineMode::Relaxed);
  CHECK(to_string(DeadlineMode::Tight) == "tight");
  CHECK_THROWS_AS(parse_deadline_mode("loose"), BadConfigError);
}

TEST_CASE("workload generation is deterministic per seed") {
  ScenarioConfig c;
  c.rng_seed = 42;
  const auto a = generate_workload(c);
  const auto b = generate_workload(c);
  CHECK(a.jobs == b.jobs);
  CHECK(a.resources == b.resources);

  c.rng_seed = 43;
  const auto other = generate_workload(c);
  CHECK(to_json(a) != to_json(other));
}

TEST_CASE("grid does not depend on the job settings") {
  ScenarioConfig c;
  c.rng_seed = 7;
  const auto base = generate_workload(c);
  c.deadline_mode = DeadlineMode::Relaxed;
  c.job_count = 10;
  CHECK(generate_workload(c).resources == base.resources);
}

TEST_CASE("distinct seeds give distinct batches") {
  std::set<std::size_t> hashes;
  ScenarioConfig c;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    c.rng_seed = seed;
    hashes.insert(std::hash<std::string>{}(to_json(generate_workload(c))));
  }
  CHECK(hashes.size() == 200);
}

TEST_CASE("sampled cost rates") {
  ScenarioConfig c;
  c.resource_count = 10000;
  std::mt19937_64 rng(5);
  const auto grid = generate_grid(c, rng);
  double sum = 0.0;
  for (const auto& r : grid) sum += r.cost_per_pe_second.uniform_rate();
  const double mean = sum / static_cast<double>(grid.size());
  CHECK(std::abs(mean - 4.5) <= 0.05);
}

TEST_CASE("every sampled quantity respects its clamp") {
  ScenarioConfig c;
  c.resource_count = 20000;
  c.job_count = 20000;
  c.deadline_mode = DeadlineMode::Medium;
  std::mt19937_64 rng(11);
  const auto grid = generate_grid(c, rng);
  for (const auto& r : grid) {
    REQUIRE(r.free_pes >= 4);
    REQUIRE(r.free_pes <= 12);
    REQUIRE(r.cost_per_pe_second.uniform_rate() >= 4.0);
    REQUIRE(r.cost_per_pe_second.uniform_rate() <= 5.0);
    REQUIRE(r.pe_speed_mips >= 200.0);
    REQUIRE(r.pe_speed_mips <= 800.0);
  }
  const auto jobs = generate_jobs(c, rng);
  for (const auto& j : jobs) {
    const double estimate = j.task_sizes_mi.front() / c.mips_mean;
    REQUIRE(j.pe_count >= 2);  // round(5 * 0.5)
    REQUIRE(j.pe_count <= 8);  // round(5 * 1.5)
    REQUIRE(estimate >= 320.0 - 1e-9);
    REQUIRE(estimate <= 480.0 + 1e-9);
    const double slack = j.deadline_s - estimate;
    REQUIRE(slack >= 200.0 - 1e-6);
    REQUIRE(slack <= 300.0 + 1e-6);
    REQUIRE(j.submit_time_s >= 0.0);
    REQUIRE(j.submit_time_s <= 20.0);
    REQUIRE(j.budget_gd == doctest::Approx(2.0 * 4.5 * j.pe_count * estimate));
  }
}

TEST_CASE("bounded gaussian") {
  std::mt19937_64 rng(3);
  BoundedGaussian g{0.0, 10.0, -1.0, 1.0};
  for (int k = 0; k < 1000; ++k) {
    const double x = g.sample(rng);
    REQUIRE(x >= -1.0);
    REQUIRE(x <= 1.0);
  }
  BoundedGaussian fixed{3.0, 0.0, 0.0, 2.0};
  CHECK(fixed.sample(rng) == 2.0);
}

TEST_CASE("config checks") {
  ScenarioConfig c;
  CHECK(check_config(c).empty());
  c.resource_count = 0;
  CHECK(check_config(c).size() == 1);
  c.resource_count = 30;
  CHECK(check_config(c).size() == 1);

  ScenarioConfig bad;
  bad.cost_min = 6.0;
  CHECK_THROWS_AS(check_config(bad), BadConfigError);
  bad = {};
  bad.job_count = -1;
  CHECK_THROWS_AS(check_config(bad), BadConfigError);
  bad = {};
  bad.schedule_interval_s = 0.0;
  CHECK_THROWS_AS(check_config(bad), BadConfigError);
  bad = {};
  bad.task_variation_max = 1.5;
  CHECK_THROWS_AS(generate_workload(bad), BadConfigError);
}

TEST_CASE("empty grid generates no resources") {
  ScenarioConfig c;
  c.resource_count = 0;
  const auto w = generate_workload(c);
  CHECK(w.resources.empty());
  CHECK(w.jobs.size() == 50);
}

TEST_CASE("text round trip") {
  ScenarioConfig c;
  c.resource_count = 5;
  c.job_count = 4;
  auto w = generate_workload(c);
  w.resources.front().cost_per_pe_second.set(JobId{2}, 7.25);
  std::stringstream buffer;
  write_text(buffer, w);
  const auto back = read_text(buffer);
  CHECK(back.resources == w.resources);
  CHECK(back.jobs == w.jobs);

  std::istringstream broken("resource id=1 pes=4\n");
  CHECK_THROWS_AS(read_text(broken), BadConfigError);
  std::istringstream unknown("machine id=1\n");
  CHECK_THROWS_AS(read_text(unknown), BadConfigError);
}

TEST_CASE("json round trip") {
  ScenarioConfig c;
  c.resource_count = 5;
  c.job_count = 4;
  c.job_kind = JobKind::Mgn;
  auto w = generate_workload(c);
  w.resources.back().cost_per_pe_second.set(JobId{1}, 3.5);
  const auto back = from_json(to_json(w));
  CHECK(back.resources == w.resources);
  CHECK(back.jobs == w.jobs);
  CHECK_THROWS_AS(from_json("{\"jobs\": 3}"), BadConfigError);
}
