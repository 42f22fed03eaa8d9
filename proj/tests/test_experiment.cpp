#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "metagrid/experiment.hpp"

using namespace metagrid;

namespace {

std::vector<ResultRow> fixture_rows() {
  std::ifstream in(METAGRID_TEST_DATA "/results_fixture.csv");
  REQUIRE(in.good());
  return read_csv(in);
}

// Two seeds of a grid small enough to simulate in milliseconds.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.resource_counts = {3, 5};
  c.seeds = 2;
  c.scenario.job_count = 6;
  c.ga.population_size = 10;
  c.ga.max_iterations = 40;
  c.ga.convergence_window = 5;
  return c;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto defaults = parse_config("");
  CHECK(defaults.resource_counts == std::vector<int>{25, 50, 100, 150, 200});
  CHECK(defaults.seeds == 10);
  CHECK(defaults.scenario.job_count == 50);
  CHECK(defaults.scenario.schedule_interval_s == 50.0);

  const auto c = parse_config(R"(
sweep:
  resource_counts: [25, 50]
  deadline_modes: [tight]
  schedulers: [mmc, lpga]
  seeds: 3
  base_seed: 100
grid:
  cost_mean: 4.25
jobs:
  count: 20
  kind: mgn
  budget_semantics: literal
simulation:
  schedule_interval_s: 30
ga:
  population_size: 20
  penalty_weight: 5000
)");
  CHECK(c.resource_counts == std::vector<int>{25, 50});
  CHECK(c.deadline_modes == std::vector<DeadlineMode>{DeadlineMode::Tight});
  CHECK(c.schedulers == std::vector<Scheduler>{Scheduler::Mmc, Scheduler::Lpga});
  CHECK(c.seeds == 3);
  CHECK(c.base_seed == 100);
  CHECK(c.scenario.cost_mean == 4.25);
  CHECK(c.scenario.job_count == 20);
  CHECK(c.scenario.job_kind == JobKind::Mgn);
  CHECK(c.scenario.budget == BudgetSemantics::Literal);
  CHECK(c.scenario.schedule_interval_s == 30.0);
  CHECK(c.ga.population_size == 20);
  CHECK(c.ga.penalty_weight == 5000.0);
}

TEST_CASE("bad configs") {
  CHECK_THROWS_AS(parse_config("sweep: [1, 2"), BadConfigError);
  CHECK_THROWS_AS(parse_config("- 1\n- 2\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("network:\n  latency: 3\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("grid:\n  cost_maen: 4\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("grid:\n  cost_mean: cheap\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("grid:\n  cost_min: 6\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("sweep:\n  schedulers: [fifo]\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("sweep:\n  deadline_modes: [loose]\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("sweep:\n  resource_counts: 25\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("sweep:\n  resource_counts: []\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("sweep:\n  seeds: 0\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("ga:\n  mutation_rate: 2\n"), BadConfigError);
  CHECK_THROWS_AS(parse_config("jobs:\n  kind: both\n"), BadConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/paper.yaml"), BadConfigError);
}

TEST_CASE("config warnings") {
  ExperimentConfig c;
  CHECK(check_config(c).empty());
  c.resource_counts = {0, 30, 30};
  CHECK(check_config(c).size() == 2);
}

TEST_CASE("paper config matches the defaults") {
  const auto c = load_config(METAGRID_SOURCE_DIR "/configs/paper.yaml");
  const ExperimentConfig d;
  CHECK(c.resource_counts == d.resource_counts);
  CHECK(c.deadline_modes == d.deadline_modes);
  CHECK(c.schedulers == d.schedulers);
  CHECK(c.seeds == d.seeds);
  CHECK(c.scenario.slack_medium_s == d.scenario.slack_medium_s);
  CHECK(c.scenario.mips_max == d.scenario.mips_max);
  CHECK(c.ga.max_iterations == d.ga.max_iterations);
}

TEST_CASE("sweep expansion") {
  const ExperimentConfig c;
  const auto cells = expand(c);
  CHECK(cells.size() == 5u * 3u * 5u * 10u);
  CHECK(cells.front().seed == 1);
  CHECK(cells.front().resource_count == 25);
  CHECK(cells.front().deadline_mode == DeadlineMode::Tight);
  CHECK(cells.front().scheduler == Scheduler::Greedy);
  CHECK(cells[1].scheduler == Scheduler::Mmc);
  CHECK(cells.back().seed == 10);
  CHECK(cells.back().scheduler == Scheduler::RelaxedMgn);

  const auto q = quick(c);
  CHECK(expand(q).size() == 15);
  CHECK(q.resource_counts == std::vector<int>{25});

  const auto s = scenario_for(c, cells[7]);
  CHECK(s.resource_count == cells[7].resource_count);
  CHECK(s.deadline_mode == cells[7].deadline_mode);
  CHECK(s.rng_seed == cells[7].seed);
}

TEST_CASE("csv round trip") {
  std::vector<ResultRow> rows = {{3, 25, DeadlineMode::Relaxed, "lpga", 1234.5678, 48, 239, 1108, 0.25},
                                 {4, 50, DeadlineMode::Tight, "greedy", 0.1 + 0.2, 15, 74, 0, 1e-5}};
  std::stringstream buffer;
  write_csv(buffer, rows);
  const auto back = read_csv(buffer);
  REQUIRE(back.size() == 2);
  CHECK(back[0].scheduler == "lpga");
  CHECK(back[0].total_cost_gd == 1234.5678);
  CHECK(back[1].total_cost_gd == 0.1 + 0.2);
  CHECK(back[1].wall_time_s == 1e-5);
  CHECK(back[1].deadline_mode == DeadlineMode::Tight);

  std::stringstream untimed;
  write_csv(untimed, rows, false);
  CHECK(untimed.str().find(",1108,\n") != std::string::npos);
  CHECK(read_csv(untimed)[0].wall_time_s == 0.0);
}

TEST_CASE("csv schema errors") {
  std::istringstream empty("");
  CHECK(read_csv(empty).empty());
  std::istringstream header_only("seed,resource_count,deadline_mode,scheduler,total_cost_gd,jobs_completed,"
                                 "tasks_completed,ga_iterations,wall_time_s\n");
  CHECK(read_csv(header_only).empty());
  std::istringstream missing("seed,resource_count,scheduler\n1,25,mmc\n");
  CHECK_THROWS_AS(read_csv(missing), MissingColumnsError);
  std::istringstream reordered("scheduler,seed,resource_count,deadline_mode,total_cost_gd,jobs_completed,"
                               "tasks_completed,ga_iterations,wall_time_s,note\nmmc,1,25,tight,10,1,5,0,0.1,x\n");
  const auto rows = read_csv(reordered);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].scheduler == "mmc");
  CHECK(rows[0].total_cost_gd == 10.0);
  std::istringstream short_line(
      "seed,resource_count,deadline_mode,scheduler,total_cost_gd,jobs_completed,tasks_completed,ga_iterations,"
      "wall_time_s\n1,25,tight\n");
  CHECK_THROWS_AS(read_csv(short_line), BadConfigError);
}

TEST_CASE("summary statistics") {
  CHECK(summarize({}).n == 0);
  const auto one = summarize({4.0});
  CHECK(one.mean == 4.0);
  CHECK(one.stddev == 0.0);
  const auto s = summarize({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  CHECK(s.mean == 5.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
}

TEST_CASE("fixture aggregates") {
  const auto groups = aggregate(fixture_rows());
  REQUIRE(groups.size() == 3);

  const auto& hga = groups.at({DeadlineMode::Medium, 25, "hga"});
  CHECK(hga.cost.n == 2);
  CHECK(hga.cost.mean == 150.0);
  CHECK(hga.cost.stddev == doctest::Approx(std::sqrt(5000.0)));
  CHECK(hga.ga_iterations.mean == 250.0);
  CHECK(hga.jobs_completed.mean == 11.0);

  const auto& lpga = groups.at({DeadlineMode::Medium, 25, "lpga"});
  CHECK(lpga.cost.mean == 120.0);
  CHECK(lpga.cost.stddev == doctest::Approx(std::sqrt(1800.0)));
  CHECK(lpga.wall_time_s.mean == doctest::Approx(0.5));

  const auto& greedy = groups.at({DeadlineMode::Relaxed, 25, "greedy"});
  CHECK(greedy.cost.n == 3);
  CHECK(greedy.cost.mean == 100.0);
  CHECK(greedy.cost.stddev == 20.0);

  CHECK(iteration_series_csv(groups) ==
        "mode,resource_count,hga_mean_iterations,lpga_mean_iterations,reduction_pct\n"
        "medium,25,250.00,200.00,20.00\n");
  CHECK(cost_series_csv(groups) ==
        "mode,scheduler,resource_count,n,mean_cost_gd,stddev_cost_gd,mean_jobs_completed\n"
        "medium,hga,25,2,150.000,70.711,11.000\n"
        "medium,lpga,25,2,120.000,42.426,11.000\n"
        "relaxed,greedy,25,3,100.000,20.000,20.000\n");

  const auto tables = summary_tables(groups);
  CHECK(tables.find("## Total cost (G$), medium deadlines") != std::string::npos);
  CHECK(tables.find("| 25 | 150.0 ± 70.7 | 120.0 ± 42.4 |") != std::string::npos);
  CHECK(tables.find("| medium | 25 | 250.00 | 200.00 | 20.00 |") != std::string::npos);
  CHECK(tables.find("tight deadlines") == std::string::npos);
  CHECK(tables.find("MGN jobs") == std::string::npos);
}

TEST_CASE("empty results give empty tables") {
  const auto groups = aggregate({});
  CHECK(groups.empty());
  CHECK(summary_tables(groups).empty());
  CHECK(iteration_series_csv(groups) ==
        "mode,resource_count,hga_mean_iterations,lpga_mean_iterations,reduction_pct\n");
}

TEST_CASE("group ordering puts known schedulers first") {
  const auto groups = aggregate({{1, 25, DeadlineMode::Tight, "zeta", 1, 1, 1, 0, 0},
                                 {1, 25, DeadlineMode::Tight, "relaxed-mgn", 1, 1, 1, 0, 0},
                                 {1, 25, DeadlineMode::Tight, "greedy", 1, 1, 1, 0, 0},
                                 {1, 25, DeadlineMode::Tight, "alpha", 1, 1, 1, 0, 0}});
  std::vector<std::string> names;
  for (const auto& [key, _] : groups) names.push_back(key.scheduler);
  CHECK(names == std::vector<std::string>{"greedy", "relaxed-mgn", "alpha", "zeta"});
}

TEST_CASE("sweep output is reproducible and independent of threads") {
  const auto config = tiny_config();
  std::ostringstream log_a;
  RunOptions serial;
  serial.log = &log_a;
  const auto a = run_experiments(config, serial);
  CHECK(a.size() == 2u * 2u * 3u * 5u);

  std::ostringstream log_b;
  RunOptions parallel;
  parallel.threads = 4;
  parallel.log = &log_b;
  std::size_t calls = 0;
  parallel.progress = [&](std::size_t, std::size_t total) {
    ++calls;
    CHECK(total == a.size());
  };
  const auto b = run_experiments(config, parallel);
  CHECK(calls == a.size());

  std::ostringstream csv_a, csv_b;
  write_csv(csv_a, a, false);
  write_csv(csv_b, b, false);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(log_a.str() == log_b.str());
  CHECK(log_a.str().find("\"resource_count\":3") != std::string::npos);

  const auto cells = expand(config);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    CHECK(a[k].seed == cells[k].seed);
    CHECK(a[k].scheduler == to_string(cells[k].scheduler));
  }
}

TEST_CASE("a failing cell surfaces its error") {
  auto config = tiny_config();
  config.scenario.mips_sigma = -1.0;
  CHECK_THROWS_AS(run_experiments(config), BadConfigError);
}
