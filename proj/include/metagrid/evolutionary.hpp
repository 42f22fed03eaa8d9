#pragma once

// Genetic search over whole-job placements, and the two seeded schedulers
// built on it: LPGA (seeded by MMC rounding of the relaxation) and HGA
// (seeded by the greedy baseline).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "metagrid/model.hpp"

namespace metagrid {

/// One resource per job, indexed like Instance::jobs() (ascending job id).
/// The dummy resource is a valid gene.
struct Chromosome {
  std::vector<ResourceId> genes;
  std::optional<double> cached_fitness;

  friend bool operator==(const Chromosome& a, const Chromosome& b) { return a.genes == b.genes; }
};

struct GaParams {
  int population_size = 50;
  double crossover_rate = 0.8;
  double mutation_rate = 0.02;
  int convergence_window = 50;
  int max_iterations = 1000;
  std::uint64_t rng_seed = 0;
  /// Defaults to default_penalty_weight() of the instance.
  std::optional<double> penalty_weight;

  /// Throws BadConfigError.
  void check() const;
};

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  /// Generations evaluated, the initial population included.
  int iterations_used = 0;
  std::vector<double> best_fitness_trace;
  std::vector<double> mean_fitness_trace;
};

/// 10 x (max rate) x (max exec time) x (max PE count) over real resources, so
/// that one breach outweighs any cost saving.
double default_penalty_weight(const Instance& instance);

/// Placement cost of the implied whole-job allocation plus penalty_weight
/// times (capacity overflow in PEs + budget breaches + deadline breaches +
/// parked jobs).
double fitness(const Chromosome& c, const Instance& instance, double penalty_weight,
               BudgetSemantics semantics = BudgetSemantics::TimeInclusive);

/// (f_max - f_i) + delta. With no delta given it is 1e-6 * f_max, or 1 when
/// f_max is zero.
std::vector<double> roulette_weights(std::span<const double> fitness_values, std::optional<double> delta = std::nullopt);

/// Two parent indices drawn with probability proportional to roulette_weights.
std::pair<std::size_t, std::size_t> roulette_select(std::span<const double> fitness_values, std::mt19937_64& rng,
                                                    std::optional<double> delta = std::nullopt);

/// Children swap gene suffixes from position `cut` onwards.
std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b, std::size_t cut);
/// Cut drawn uniformly from 0..genes.size().
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, std::mt19937_64& rng);

/// Each gene is redrawn uniformly from `resources` with probability `rate`.
Chromosome mutate(Chromosome c, std::mt19937_64& rng, double rate, std::span<const ResourceId> resources);

Chromosome random_chromosome(const Instance& instance, std::mt19937_64& rng);
Chromosome to_chromosome(const Schedule& schedule, const Instance& instance);

/// Walks jobs in QoS order and keeps each gene whose placement still fits
/// capacity, deadline and budget; the rest are parked. A zero-penalty
/// chromosome decodes to exactly its own placement.
Schedule decode(const Chromosome& c, const Instance& instance,
                BudgetSemantics semantics = BudgetSemantics::TimeInclusive);

/// `instance` should carry a dummy resource. Throws BadConfigError when
/// there are more seeds than population slots.
GaResult run_ga(std::span<const Chromosome> seeds, const Instance& instance, const GaParams& params,
                BudgetSemantics semantics = BudgetSemantics::TimeInclusive);

/// generation,best_fitness,mean_fitness
void write_trace_csv(std::ostream& out, const GaResult& result);

struct EvolutionConfig {
  BudgetSemantics budget = BudgetSemantics::TimeInclusive;
  /// When false the relaxation raises InfeasibleError instead of using a dummy.
  bool allow_dummy = true;
};

struct Notification {
  JobId job;
  std::optional<ResourceId> resource;  ///< nullopt: rolled over
};

struct SeededGaResult {
  Schedule schedule;
  GaResult ga;
  Schedule seed;
  double seed_fitness = 0.0;
  /// Fitness of the decoded final schedule.
  double final_fitness = 0.0;
  std::vector<Notification> notifications;
};

SeededGaResult lpga(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources, const GaParams& params,
                    const EvolutionConfig& config = {});
SeededGaResult hga(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources, const GaParams& params,
                   const EvolutionConfig& config = {});

}  // namespace metagrid
