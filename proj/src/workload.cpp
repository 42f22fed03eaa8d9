#include "metagrid/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace metagrid {

std::string to_string(DeadlineMode mode) {
  switch (mode) {
    case DeadlineMode::Tight: return "tight";
    case DeadlineMode::Medium: return "medium";
    case DeadlineMode::Relaxed: return "relaxed";
  }
  return "?";
}

DeadlineMode parse_deadline_mode(const std::string& text) {
  if (text == "tight") return DeadlineMode::Tight;
  if (text == "medium") return DeadlineMode::Medium;
  if (text == "relaxed") return DeadlineMode::Relaxed;
  throw BadConfigError("unknown deadline mode '" + text + "'");
}

double BoundedGaussian::sample(std::mt19937_64& rng) const {
  if (sigma <= 0.0) return std::clamp(mean, lo, hi);
  std::normal_distribution<double> draw(mean, sigma);
  return std::clamp(draw(rng), lo, hi);
}

double ScenarioConfig::slack_s() const {
  switch (deadline_mode) {
    case DeadlineMode::Tight: return slack_tight_s;
    case DeadlineMode::Medium: return slack_medium_s;
    case DeadlineMode::Relaxed: return slack_relaxed_s;
  }
  return slack_medium_s;
}

std::vector<std::string> check_config(const ScenarioConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw BadConfigError(what);
  };
  require(c.resource_count >= 0, "resource_count must be nonnegative");
  require(c.pe_min >= 0 && c.pe_min <= c.pe_max, "pe range must satisfy 0 <= pe_min <= pe_max");
  require(c.pe_mean >= c.pe_min && c.pe_mean <= c.pe_max, "pe_mean must lie in the pe range");
  require(c.cost_min > 0.0 && c.cost_min <= c.cost_max, "cost range must satisfy 0 < cost_min <= cost_max");
  require(c.cost_mean >= c.cost_min && c.cost_mean <= c.cost_max, "cost_mean must lie in the cost range");
  require(c.mips_min > 0.0 && c.mips_min <= c.mips_max, "mips range must satisfy 0 < mips_min <= mips_max");
  require(c.mips_mean >= c.mips_min && c.mips_mean <= c.mips_max, "mips_mean must lie in the mips range");
  require(c.mips_sigma >= 0.0, "mips_sigma must be nonnegative");
  require(c.job_count >= 0, "job_count must be nonnegative");
  require(c.tasks_mean >= 1.0, "tasks_mean must be at least 1");
  require(c.task_variation_min >= 0.0 && c.task_variation_min <= c.task_variation_max && c.task_variation_max < 1.0,
          "task variation must satisfy 0 <= min <= max < 1");
  require(c.runtime_mean_s > 0.0, "runtime_mean_s must be positive");
  require(c.runtime_variation >= 0.0 && c.runtime_variation < 1.0, "runtime_variation must lie in [0, 1)");
  require(c.slack_tight_s >= 0.0 && c.slack_medium_s >= 0.0 && c.slack_relaxed_s >= 0.0, "slacks must be nonnegative");
  require(c.slack_variation >= 0.0 && c.slack_variation < 1.0, "slack_variation must lie in [0, 1)");
  require(c.budget_factor > 0.0, "budget_factor must be positive");
  require(c.submit_window_s >= 0.0, "submit_window_s must be nonnegative");
  require(c.schedule_interval_s > 0.0, "schedule_interval_s must be positive");

  std::vector<std::string> warnings;
  if (c.resource_count == 0) warnings.push_back("resource_count is 0: the grid is empty");
  else if (c.resource_count != 25 && c.resource_count != 50 && c.resource_count != 100 && c.resource_count != 150 &&
           c.resource_count != 200)
    warnings.push_back("resource_count " + std::to_string(c.resource_count) + " is outside {25, 50, 100, 150, 200}");
  if (c.pe_max > 0 && c.pe_min == 0) warnings.push_back("pe_min 0 allows resources without PEs");
  return warnings;
}

namespace {

// Three-sigma fit of a symmetric range.
BoundedGaussian three_sigma(double mean, double lo, double hi) {
  return {mean, std::max(mean - lo, hi - mean) / 3.0, lo, hi};
}

BoundedGaussian relative(double mean, double variation) {
  return {mean, mean * variation / 3.0, mean * (1.0 - variation), mean * (1.0 + variation)};
}

}  // namespace

std::vector<ResourceInfo> generate_grid(const ScenarioConfig& config, std::mt19937_64& rng) {
  check_config(config);
  const auto pes = three_sigma(config.pe_mean, config.pe_min, config.pe_max);
  const auto cost = three_sigma(config.cost_mean, config.cost_min, config.cost_max);
  const BoundedGaussian mips{config.mips_mean, config.mips_sigma, config.mips_min, config.mips_max};
  std::vector<ResourceInfo> grid;
  for (int i = 0; i < config.resource_count; ++i) {
    const int n = static_cast<int>(std::lround(pes.sample(rng)));
    const double rate = cost.sample(rng);
    const double speed = mips.sample(rng);
    grid.push_back(make_resource(ResourceId{static_cast<std::uint32_t>(i + 1)}, n, speed, rate));
  }
  return grid;
}

std::vector<JobRequest> generate_jobs(const ScenarioConfig& config, std::mt19937_64& rng) {
  check_config(config);
  std::uniform_real_distribution<double> variation(config.task_variation_min, config.task_variation_max);
  std::uniform_real_distribution<double> submit(0.0, config.submit_window_s);
  const auto runtime = relative(config.runtime_mean_s, config.runtime_variation);
  const auto slack = relative(config.slack_s(), config.slack_variation);

  std::vector<JobRequest> jobs;
  for (int j = 0; j < config.job_count; ++j) {
    const double v = variation(rng);
    const double lo = std::max(1.0, std::round(config.tasks_mean * (1.0 - v)));
    const double hi = std::max(lo, std::round(config.tasks_mean * (1.0 + v)));
    const BoundedGaussian tasks{config.tasks_mean, config.tasks_mean * v, lo, hi};
    const int m = static_cast<int>(std::lround(tasks.sample(rng)));
    const double estimate = runtime.sample(rng);
    const double deadline = estimate + slack.sample(rng);
    const double budget = config.budget_factor * config.cost_mean * m * estimate;
    const double submitted = submit(rng);
    // Every task runs for `estimate` seconds on a PE of mean speed.
    std::vector<double> sizes(m, estimate * config.mips_mean);
    const auto id = static_cast<std::uint32_t>(j + 1);
    jobs.push_back(make_job(JobId{id}, std::move(sizes), deadline, budget, config.job_kind, id, submitted));
  }
  return jobs;
}

Workload generate_workload(const ScenarioConfig& config) {
  std::seed_seq grid_seq{config.rng_seed, std::uint64_t{1}};
  std::seed_seq job_seq{config.rng_seed, std::uint64_t{2}};
  std::mt19937_64 grid_rng(grid_seq);
  std::mt19937_64 job_rng(job_seq);
  Workload out;
  out.resources = generate_grid(config, grid_rng);
  out.jobs = generate_jobs(config, job_rng);
  return out;
}

namespace {

std::string number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

double parse_number(const std::string& text, const std::string& field) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw BadConfigError("field '" + field + "' is not a number: '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string rate_overrides(const CostRates& rates) {
  std::string out;
  for (const auto& [job, rate] : rates.overrides()) {
    if (!out.empty()) out += ',';
    out += std::to_string(job.value) + ':' + number(rate);
  }
  return out;
}

}  // namespace

void write_text(std::ostream& out, const Workload& workload) {
  for (const auto& r : workload.resources) {
    out << "resource id=" << r.id.value << " pes=" << r.free_pes << " mips=" << number(r.pe_speed_mips)
        << " rate=" << number(r.cost_per_pe_second.uniform_rate());
    if (!r.cost_per_pe_second.overrides().empty()) out << " rates=" << rate_overrides(r.cost_per_pe_second);
    out << '\n';
  }
  for (const auto& j : workload.jobs) {
    out << "job id=" << j.id.value << " user=" << j.user_id << " kind=" << to_string(j.kind)
        << " budget=" << number(j.budget_gd) << " deadline=" << number(j.deadline_s)
        << " submit=" << number(j.submit_time_s) << " tasks=";
    for (std::size_t k = 0; k < j.task_sizes_mi.size(); ++k) out << (k ? "," : "") << number(j.task_sizes_mi[k]);
    out << '\n';
  }
}

Workload read_text(std::istream& in) {
  Workload out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    std::string kind;
    words >> kind;
    std::map<std::string, std::string> fields;
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) throw BadConfigError("line " + std::to_string(line_no) + ": expected name=value");
      fields[word.substr(0, eq)] = word.substr(eq + 1);
    }
    auto field = [&](const std::string& name) -> const std::string& {
      auto it = fields.find(name);
      if (it == fields.end()) throw BadConfigError("line " + std::to_string(line_no) + ": missing field '" + name + "'");
      return it->second;
    };
    if (kind == "resource") {
      auto r = make_resource(ResourceId{static_cast<std::uint32_t>(parse_number(field("id"), "id"))},
                             static_cast<int>(parse_number(field("pes"), "pes")), parse_number(field("mips"), "mips"),
                             parse_number(field("rate"), "rate"));
      if (fields.contains("rates")) {
        for (const auto& pair : split(fields["rates"], ',')) {
          const auto colon = pair.find(':');
          if (colon == std::string::npos) throw BadConfigError("line " + std::to_string(line_no) + ": bad rate override");
          r.cost_per_pe_second.set(JobId{static_cast<std::uint32_t>(parse_number(pair.substr(0, colon), "rates"))},
                                   parse_number(pair.substr(colon + 1), "rates"));
        }
      }
      out.resources.push_back(std::move(r));
    } else if (kind == "job") {
      std::vector<double> tasks;
      for (const auto& t : split(field("tasks"), ',')) tasks.push_back(parse_number(t, "tasks"));
      out.jobs.push_back(make_job(JobId{static_cast<std::uint32_t>(parse_number(field("id"), "id"))}, std::move(tasks),
                                  parse_number(field("deadline"), "deadline"), parse_number(field("budget"), "budget"),
                                  parse_job_kind(field("kind")),
                                  static_cast<std::uint32_t>(parse_number(field("user"), "user")),
                                  parse_number(field("submit"), "submit")));
    } else {
      throw BadConfigError("line " + std::to_string(line_no) + ": unknown record '" + kind + "'");
    }
  }
  return out;
}

std::string to_json(const Workload& workload) {
  using nlohmann::json;
  json doc;
  doc["resources"] = json::array();
  for (const auto& r : workload.resources) {
    json overrides = json::object();
    for (const auto& [job, rate] : r.cost_per_pe_second.overrides()) overrides[std::to_string(job.value)] = rate;
    doc["resources"].push_back({{"id", r.id.value},
                                {"free_pes", r.free_pes},
                                {"pe_speed_mips", r.pe_speed_mips},
                                {"cost_per_pe_second", r.cost_per_pe_second.uniform_rate()},
                                {"rate_overrides", overrides}});
  }
  doc["jobs"] = json::array();
  for (const auto& j : workload.jobs) {
    doc["jobs"].push_back({{"id", j.id.value},
                           {"user_id", j.user_id},
                           {"kind", to_string(j.kind)},
                           {"budget_gd", j.budget_gd},
                           {"deadline_s", j.deadline_s},
                           {"submit_time_s", j.submit_time_s},
                           {"task_sizes_mi", j.task_sizes_mi}});
  }
  return doc.dump(2);
}

Workload from_json(const std::string& text) {
  using nlohmann::json;
  Workload out;
  try {
    const auto doc = json::parse(text);
    for (const auto& r : doc.at("resources")) {
      auto resource = make_resource(ResourceId{r.at("id").get<std::uint32_t>()}, r.at("free_pes").get<int>(),
                                    r.at("pe_speed_mips").get<double>(), r.at("cost_per_pe_second").get<double>());
      if (r.contains("rate_overrides"))
        for (const auto& [job, rate] : r.at("rate_overrides").items())
          resource.cost_per_pe_second.set(JobId{static_cast<std::uint32_t>(std::stoul(job))}, rate.get<double>());
      out.resources.push_back(std::move(resource));
    }
    for (const auto& j : doc.at("jobs")) {
      out.jobs.push_back(make_job(JobId{j.at("id").get<std::uint32_t>()}, j.at("task_sizes_mi").get<std::vector<double>>(),
                                  j.at("deadline_s").get<double>(), j.at("budget_gd").get<double>(),
                                  parse_job_kind(j.at("kind").get<std::string>()), j.at("user_id").get<std::uint32_t>(),
                                  j.at("submit_time_s").get<double>()));
    }
  } catch (const json::exception& e) {
    throw BadConfigError(std::string("malformed workload JSON: ") + e.what());
  }
  return out;
}

}  // namespace metagrid
