// metagrid: run the scheduling sweep or summarize a results CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "metagrid/experiment.hpp"

namespace fs = std::filesystem;
using namespace metagrid;

namespace {

constexpr int kBadConfig = 1;
constexpr int kSolverFailure = 2;

std::vector<Scheduler> parse_scheduler_list(const std::string& text) {
  std::vector<Scheduler> out;
  std::stringstream in(text);
  std::string name;
  while (std::getline(in, name, ','))
    if (!name.empty()) out.push_back(parse_scheduler(name));
  if (out.empty()) throw BadConfigError("--schedulers names no scheduler");
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw BadConfigError("METAGRID_SEED is not an unsigned integer: '" + text + "'");
  return value;
}

// Writes next to the target and renames, so a failed run leaves no partial file.
void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << text;
  }
  fs::rename(tmp, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-minimising meta-scheduler experiments"};
  app.require_subcommand(0, 1);

  std::string config_path;
  bool quick_run = false;
  int seeds = 0;
  std::string scheduler_list;
  std::string out_dir = "results";
  bool verbose = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool no_timing = false;
  app.add_option("--config", config_path, "YAML experiment config")->check(CLI::ExistingFile);
  app.add_flag("--quick", quick_run, "one seed at 25 resources");
  app.add_option("--seeds", seeds, "number of seeds per cell")->check(CLI::PositiveNumber);
  app.add_option("--schedulers", scheduler_list, "comma-separated subset of greedy,mmc,hga,lpga,relaxed-mgn");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("--verbose", verbose, "write per-period events to events.jsonl and progress to stderr");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--no-timing", no_timing, "leave wall_time_s empty so reruns are byte-identical");

  auto* report = app.add_subcommand("report", "summarize a results CSV");
  std::string csv_path;
  std::string report_dir;
  report->add_option("csv", csv_path, "results CSV")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_dir, "directory for the tables and series (default: next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadConfig;
  }

  if (report->parsed()) {
    try {
      std::ifstream in(csv_path);
      const auto groups = aggregate(read_csv(in));
      const std::string dir = report_dir.empty() ? fs::path(csv_path).parent_path().string() : report_dir;
      write_report(dir.empty() ? "." : dir, groups);
      std::cout << summary_tables(groups);
      return 0;
    } catch (const MissingColumnsError& e) {
      std::cerr << "metagrid: " << e.what() << '\n';
      return kBadConfig;
    } catch (const BadConfigError& e) {
      std::cerr << "metagrid: " << e.what() << '\n';
      return kBadConfig;
    } catch (const std::exception& e) {
      std::cerr << "metagrid: " << e.what() << '\n';
      return kSolverFailure;
    }
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    if (const char* env = std::getenv("METAGRID_SEED")) config.base_seed = parse_seed(env);
    if (quick_run) config = quick(std::move(config));
    if (seeds > 0) config.seeds = seeds;
    if (!scheduler_list.empty()) config.schedulers = parse_scheduler_list(scheduler_list);
    for (const auto& warning : check_config(config)) std::cerr << "metagrid: warning: " << warning << '\n';
  } catch (const Error& e) {
    std::cerr << "metagrid: " << e.what() << '\n';
    return kBadConfig;
  }

  try {
    std::ostringstream events;
    RunOptions options;
    options.threads = threads;
    if (verbose) {
      options.log = &events;
      options.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\rmetagrid: " << done << '/' << total << " cells" << (done == total ? "\n" : "") << std::flush;
      };
    }
    const auto rows = run_experiments(config, options);

    fs::create_directories(out_dir);
    std::ostringstream csv;
    write_csv(csv, rows, !no_timing);
    write_atomically(fs::path(out_dir) / "results.csv", csv.str());
    if (verbose) write_atomically(fs::path(out_dir) / "events.jsonl", events.str());
    const auto groups = aggregate(rows);
    write_report(out_dir, groups);
    std::cout << summary_tables(groups);
    std::cout << "wrote " << rows.size() << " rows to " << (fs::path(out_dir) / "results.csv").string() << '\n';
  } catch (const BadConfigError& e) {
    std::cerr << "metagrid: " << e.what() << '\n';
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "metagrid: solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
