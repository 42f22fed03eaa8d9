#include "metagrid/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace metagrid {
namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw BadConfigError("bad value for '" + key + "'");
  }
}

template <typename T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw BadConfigError("'" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(item, key));
  return out;
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;

template <typename T>
Setter field(T& target) {
  return [&target](const YAML::Node& node, const std::string& key) { target = scalar<T>(node, key); };
}

void apply_section(const YAML::Node& root, const std::string& name, const std::map<std::string, Setter>& setters) {
  const YAML::Node section = root[name];
  if (!section) return;
  if (!section.IsMap()) throw BadConfigError("section '" + name + "' must be a mapping");
  for (const auto& entry : section) {
    const auto key = entry.first.as<std::string>();
    auto it = setters.find(key);
    if (it == setters.end()) throw BadConfigError("unknown key '" + name + "." + key + "'");
    it->second(entry.second, name + "." + key);
  }
}

std::string number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_value(const std::string& text, const std::string& column, int line) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw BadConfigError("line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
  return value;
}

int scheduler_rank(const std::string& name) {
  const auto& list = all_schedulers();
  for (std::size_t k = 0; k < list.size(); ++k)
    if (to_string(list[k]) == name) return static_cast<int>(k);
  return static_cast<int>(list.size());
}

std::string cell_text(const Stat& s, int digits) {
  if (s.n == 0) return "";
  return fixed(s.mean, digits) + " ± " + fixed(s.stddev, digits);
}

std::vector<int> counts_of(const std::map<GroupKey, CellSummary>& groups, DeadlineMode mode) {
  std::set<int> counts;
  for (const auto& [key, _] : groups)
    if (key.deadline_mode == mode) counts.insert(key.resource_count);
  return {counts.begin(), counts.end()};
}

std::vector<std::string> schedulers_of(const std::map<GroupKey, CellSummary>& groups, DeadlineMode mode) {
  std::vector<std::string> names;
  for (const auto& [key, _] : groups)
    if (key.deadline_mode == mode && std::find(names.begin(), names.end(), key.scheduler) == names.end())
      names.push_back(key.scheduler);
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return std::pair(scheduler_rank(a), a) < std::pair(scheduler_rank(b), b);
  });
  return names;
}

const CellSummary* find_group(const std::map<GroupKey, CellSummary>& groups, DeadlineMode mode, int count,
                              const std::string& scheduler) {
  auto it = groups.find({mode, count, scheduler});
  return it == groups.end() ? nullptr : &it->second;
}

constexpr DeadlineMode kModes[] = {DeadlineMode::Tight, DeadlineMode::Medium, DeadlineMode::Relaxed};

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw BadConfigError(std::string("malformed YAML: ") + e.what());
  }
  ExperimentConfig config;
  if (!root || root.IsNull()) return config;
  if (!root.IsMap()) throw BadConfigError("config must be a mapping of sections");
  for (const auto& entry : root) {
    static const std::set<std::string> sections = {"sweep", "grid", "jobs", "simulation", "ga"};
    const auto name = entry.first.as<std::string>();
    if (!sections.contains(name)) throw BadConfigError("unknown section '" + name + "'");
  }

  auto& s = config.scenario;
  apply_section(root, "sweep",
                {{"resource_counts",
                  [&](const YAML::Node& n, const std::string& k) { config.resource_counts = sequence<int>(n, k); }},
                 {"deadline_modes",
                  [&](const YAML::Node& n, const std::string& k) {
                    config.deadline_modes.clear();
                    for (const auto& text : sequence<std::string>(n, k))
                      config.deadline_modes.push_back(parse_deadline_mode(text));
                  }},
                 {"schedulers",
                  [&](const YAML::Node& n, const std::string& k) {
                    config.schedulers.clear();
                    for (const auto& text : sequence<std::string>(n, k)) {
                      try {
                        config.schedulers.push_back(parse_scheduler(text));
                      } catch (const UnknownSchedulerError& e) {
                        throw BadConfigError(e.what());
                      }
                    }
                  }},
                 {"seeds", field(config.seeds)},
                 {"base_seed", field(config.base_seed)}});
  apply_section(root, "grid",
                {{"pe_min", field(s.pe_min)},
                 {"pe_max", field(s.pe_max)},
                 {"pe_mean", field(s.pe_mean)},
                 {"cost_min", field(s.cost_min)},
                 {"cost_max", field(s.cost_max)},
                 {"cost_mean", field(s.cost_mean)},
                 {"mips_mean", field(s.mips_mean)},
                 {"mips_sigma", field(s.mips_sigma)},
                 {"mips_min", field(s.mips_min)},
                 {"mips_max", field(s.mips_max)}});
  apply_section(
      root, "jobs",
      {{"count", field(s.job_count)},
       {"tasks_mean", field(s.tasks_mean)},
       {"task_variation_min", field(s.task_variation_min)},
       {"task_variation_max", field(s.task_variation_max)},
       {"runtime_mean_s", field(s.runtime_mean_s)},
       {"runtime_variation", field(s.runtime_variation)},
       {"slack_tight_s", field(s.slack_tight_s)},
       {"slack_medium_s", field(s.slack_medium_s)},
       {"slack_relaxed_s", field(s.slack_relaxed_s)},
       {"slack_variation", field(s.slack_variation)},
       {"budget_factor", field(s.budget_factor)},
       {"submit_window_s", field(s.submit_window_s)},
       {"kind",
        [&](const YAML::Node& n, const std::string& k) {
          try {
            s.job_kind = parse_job_kind(scalar<std::string>(n, k));
          } catch (const InvalidModelError& e) {
            throw BadConfigError(e.what());
          }
        }},
       {"budget_semantics", [&](const YAML::Node& n, const std::string& k) {
          try {
            s.budget = parse_budget_semantics(scalar<std::string>(n, k));
          } catch (const InvalidModelError& e) {
            throw BadConfigError(e.what());
          }
        }}});
  apply_section(root, "simulation", {{"schedule_interval_s", field(s.schedule_interval_s)}});
  apply_section(root, "ga",
                {{"population_size", field(config.ga.population_size)},
                 {"crossover_rate", field(config.ga.crossover_rate)},
                 {"mutation_rate", field(config.ga.mutation_rate)},
                 {"convergence_window", field(config.ga.convergence_window)},
                 {"max_iterations", field(config.ga.max_iterations)},
                 {"penalty_weight", [&](const YAML::Node& n, const std::string& k) {
                    config.ga.penalty_weight = scalar<double>(n, k);
                  }}});
  check_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfigError("cannot read config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::vector<std::string> check_config(const ExperimentConfig& config) {
  if (config.resource_counts.empty()) throw BadConfigError("sweep.resource_counts is empty");
  if (config.deadline_modes.empty()) throw BadConfigError("sweep.deadline_modes is empty");
  if (config.schedulers.empty()) throw BadConfigError("sweep.schedulers is empty");
  if (config.seeds < 1) throw BadConfigError("sweep.seeds must be at least 1");
  config.ga.check();
  std::vector<std::string> warnings;
  for (int count : config.resource_counts) {
    ScenarioConfig scenario = config.scenario;
    scenario.resource_count = count;
    for (auto& w : check_config(scenario))
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(std::move(w));
  }
  return warnings;
}

ExperimentConfig quick(ExperimentConfig config) {
  config.seeds = 1;
  config.resource_counts = {25};
  return config;
}

std::vector<Cell> expand(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (int k = 0; k < config.seeds; ++k)
    for (int count : config.resource_counts)
      for (DeadlineMode mode : config.deadline_modes)
        for (Scheduler scheduler : config.schedulers)
          cells.push_back({config.base_seed + static_cast<std::uint64_t>(k), count, mode, scheduler});
  return cells;
}

ScenarioConfig scenario_for(const ExperimentConfig& config, const Cell& cell) {
  ScenarioConfig scenario = config.scenario;
  scenario.resource_count = cell.resource_count;
  scenario.deadline_mode = cell.deadline_mode;
  scenario.rng_seed = cell.seed;
  return scenario;
}

std::vector<ResultRow> run_experiments(const ExperimentConfig& config, const RunOptions& options) {
  check_config(config);
  const auto cells = expand(config);
  std::vector<ResultRow> rows(cells.size());
  std::vector<std::string> logs(options.log ? cells.size() : 0);
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> stop{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    while (!stop) {
      const std::size_t k = next++;
      if (k >= cells.size()) return;
      const Cell& cell = cells[k];
      try {
        std::ostringstream log;
        const auto m =
            run_scenario(scenario_for(config, cell), cell.scheduler, config.ga, options.log ? &log : nullptr);
        rows[k] = {cell.seed,        cell.resource_count, cell.deadline_mode,
                   to_string(cell.scheduler), m.total_cost_gd,       m.jobs_completed,
                   m.tasks_completed, m.ga_iterations,      m.wall_time_s};
        if (options.log) logs[k] = log.str();
      } catch (...) {
        errors[k] = std::current_exception();
        stop = true;
      }
      const std::size_t finished = ++done;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(finished, cells.size());
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);

  if (options.log) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      std::istringstream lines(logs[k]);
      std::string line;
      while (std::getline(lines, line)) {
        auto record = nlohmann::json::parse(line);
        record["seed"] = cells[k].seed;
        record["resource_count"] = cells[k].resource_count;
        record["deadline_mode"] = to_string(cells[k].deadline_mode);
        *options.log << record.dump() << '\n';
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool with_timing) {
  for (std::size_t k = 0; k < kCsvColumns.size(); ++k) out << (k ? "," : "") << kCsvColumns[k];
  out << '\n';
  for (const auto& r : rows) {
    out << r.seed << ',' << r.resource_count << ',' << to_string(r.deadline_mode) << ',' << r.scheduler << ','
        << number(r.total_cost_gd) << ',' << r.jobs_completed << ',' << r.tasks_completed << ',' << r.ga_iterations
        << ',';
    if (with_timing) out << number(r.wall_time_s);
    out << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < header.size(); ++k) index.emplace(header[k], k);
  std::string missing;
  for (const auto& column : kCsvColumns)
    if (!index.contains(column)) missing += (missing.empty() ? "" : ", ") + column;
  if (!missing.empty()) throw MissingColumnsError("CSV lacks columns: " + missing);

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto values = split(line, ',');
    if (values.size() != header.size())
      throw BadConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                           " fields");
    auto at = [&](const std::string& column) -> const std::string& { return values[index.at(column)]; };
    ResultRow row;
    row.seed = parse_value<std::uint64_t>(at("seed"), "seed", line_no);
    row.resource_count = parse_value<int>(at("resource_count"), "resource_count", line_no);
    row.deadline_mode = parse_deadline_mode(at("deadline_mode"));
    row.scheduler = at("scheduler");
    row.total_cost_gd = parse_value<double>(at("total_cost_gd"), "total_cost_gd", line_no);
    row.jobs_completed = parse_value<int>(at("jobs_completed"), "jobs_completed", line_no);
    row.tasks_completed = parse_value<int>(at("tasks_completed"), "tasks_completed", line_no);
    row.ga_iterations = parse_value<int>(at("ga_iterations"), "ga_iterations", line_no);
    if (!at("wall_time_s").empty()) row.wall_time_s = parse_value<double>(at("wall_time_s"), "wall_time_s", line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(squares / (s.n - 1));
  }
  return s;
}

std::strong_ordering GroupKey::operator<=>(const GroupKey& other) const {
  if (auto c = deadline_mode <=> other.deadline_mode; c != 0) return c;
  if (auto c = resource_count <=> other.resource_count; c != 0) return c;
  if (auto c = scheduler_rank(scheduler) <=> scheduler_rank(other.scheduler); c != 0) return c;
  return scheduler.compare(other.scheduler) <=> 0;
}

std::map<GroupKey, CellSummary> aggregate(const std::vector<ResultRow>& rows) {
  struct Columns {
    std::vector<double> cost, jobs, tasks, iterations, wall;
  };
  std::map<GroupKey, Columns> columns;
  for (const auto& r : rows) {
    auto& c = columns[{r.deadline_mode, r.resource_count, r.scheduler}];
    c.cost.push_back(r.total_cost_gd);
    c.jobs.push_back(r.jobs_completed);
    c.tasks.push_back(r.tasks_completed);
    c.iterations.push_back(r.ga_iterations);
    c.wall.push_back(r.wall_time_s);
  }
  std::map<GroupKey, CellSummary> out;
  for (const auto& [key, c] : columns)
    out[key] = {summarize(c.cost), summarize(c.jobs), summarize(c.tasks), summarize(c.iterations), summarize(c.wall)};
  return out;
}

std::string summary_tables(const std::map<GroupKey, CellSummary>& groups) {
  std::ostringstream out;
  for (DeadlineMode mode : kModes) {
    const auto counts = counts_of(groups, mode);
    if (counts.empty()) continue;
    const auto names = schedulers_of(groups, mode);
    out << "## Total cost (G$), " << to_string(mode) << " deadlines\n\n| resources |";
    for (const auto& name : names) out << ' ' << name << " |";
    out << "\n|---|";
    for (std::size_t k = 0; k < names.size(); ++k) out << "---|";
    out << '\n';
    for (int count : counts) {
      out << "| " << count << " |";
      for (const auto& name : names) {
        const auto* g = find_group(groups, mode, count, name);
        out << ' ' << (g ? cell_text(g->cost, 1) : "") << " |";
      }
      out << '\n';
    }
    out << "\n## Jobs completed, " << to_string(mode) << " deadlines\n\n| resources |";
    for (const auto& name : names) out << ' ' << name << " |";
    out << "\n|---|";
    for (std::size_t k = 0; k < names.size(); ++k) out << "---|";
    out << '\n';
    for (int count : counts) {
      out << "| " << count << " |";
      for (const auto& name : names) {
        const auto* g = find_group(groups, mode, count, name);
        out << ' ' << (g ? cell_text(g->jobs_completed, 1) : "") << " |";
      }
      out << '\n';
    }
    out << '\n';
  }

  // Cost of the MGN relaxation across deadline modes.
  std::set<int> mgn_counts;
  for (const auto& [key, _] : groups)
    if (key.scheduler == "relaxed-mgn") mgn_counts.insert(key.resource_count);
  if (!mgn_counts.empty()) {
    out << "## Total cost spent by users for MGN jobs (G$)\n\n| resources | tight | medium | relaxed |\n|---|---|---|---|\n";
    for (int count : mgn_counts) {
      out << "| " << count << " |";
      for (DeadlineMode mode : kModes) {
        const auto* g = find_group(groups, mode, count, "relaxed-mgn");
        out << ' ' << (g ? fixed(g->cost.mean, 1) + " (" + fixed(g->jobs_completed.mean, 1) + " jobs)" : "") << " |";
      }
      out << '\n';
    }
    out << '\n';
  }

  const std::string iterations = iteration_series_csv(groups);
  if (std::count(iterations.begin(), iterations.end(), '\n') > 1) {
    out << "## GA iterations\n\n| deadlines | resources | hga | lpga | reduction % |\n|---|---|---|---|---|\n";
    std::istringstream lines(iterations);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
      const auto f = split(line, ',');
      out << "| " << f[0] << " | " << f[1] << " | " << f[2] << " | " << f[3] << " | " << f[4] << " |\n";
    }
    out << '\n';
  }
  return out.str();
}

std::string cost_series_csv(const std::map<GroupKey, CellSummary>& groups) {
  std::ostringstream out;
  out << "mode,scheduler,resource_count,n,mean_cost_gd,stddev_cost_gd,mean_jobs_completed\n";
  for (DeadlineMode mode : kModes) {
    for (const auto& name : schedulers_of(groups, mode)) {
      for (const auto& [key, g] : groups) {
        if (key.deadline_mode != mode || key.scheduler != name) continue;
        out << to_string(mode) << ',' << name << ',' << key.resource_count << ',' << g.cost.n << ','
            << fixed(g.cost.mean, 3) << ',' << fixed(g.cost.stddev, 3) << ',' << fixed(g.jobs_completed.mean, 3)
            << '\n';
      }
    }
  }
  return out.str();
}

std::string iteration_series_csv(const std::map<GroupKey, CellSummary>& groups) {
  std::ostringstream out;
  out << "mode,resource_count,hga_mean_iterations,lpga_mean_iterations,reduction_pct\n";
  for (DeadlineMode mode : kModes) {
    for (int count : counts_of(groups, mode)) {
      const auto* hga = find_group(groups, mode, count, "hga");
      const auto* lpga = find_group(groups, mode, count, "lpga");
      if (!hga || !lpga) continue;
      const double h = hga->ga_iterations.mean;
      const double l = lpga->ga_iterations.mean;
      out << to_string(mode) << ',' << count << ',' << fixed(h, 2) << ',' << fixed(l, 2) << ','
          << (h > 0.0 ? fixed(100.0 * (h - l) / h, 2) : "") << '\n';
    }
  }
  return out.str();
}

void write_report(const std::string& dir, const std::map<GroupKey, CellSummary>& groups) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error("cannot write " + name + " in '" + dir + "'");
    out << text;
  };
  write("summary.md", summary_tables(groups));
  write("cost_series.csv", cost_series_csv(groups));
  write("iteration_series.csv", iteration_series_csv(groups));
}

}  // namespace metagrid
