#include "metagrid/evolutionary.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "metagrid/greedy.hpp"
#include "metagrid/mmc.hpp"
#include "metagrid/relaxed.hpp"

namespace metagrid {

void GaParams::check() const {
  if (population_size < 2) throw BadConfigError("population_size must be at least 2");
  if (crossover_rate < 0.0 || crossover_rate > 1.0) throw BadConfigError("crossover_rate must lie in [0, 1]");
  if (mutation_rate < 0.0 || mutation_rate > 1.0) throw BadConfigError("mutation_rate must lie in [0, 1]");
  if (convergence_window < 1) throw BadConfigError("convergence_window must be at least 1");
  if (max_iterations < 1) throw BadConfigError("max_iterations must be positive");
  if (penalty_weight && !(*penalty_weight > 0.0)) throw BadConfigError("penalty_weight must be positive");
}

double default_penalty_weight(const Instance& instance) {
  double max_rate = 0.0;
  double max_time = 0.0;
  int max_pes = 0;
  for (const auto& job : instance.jobs()) max_pes = std::max(max_pes, job.pe_count);
  for (const auto& r : instance.resources()) {
    if (r.is_dummy) continue;
    max_rate = std::max(max_rate, r.cost_per_pe_second.max_rate());
    for (const auto& job : instance.jobs()) max_time = std::max(max_time, exec_time(job, r));
  }
  const double weight = 10.0 * max_rate * max_time * max_pes;
  return weight > 0.0 ? weight : 1.0;
}

double fitness(const Chromosome& c, const Instance& instance, double penalty_weight, BudgetSemantics semantics) {
  const auto jobs = instance.jobs();
  const auto resources = instance.resources();
  std::vector<int> used(resources.size(), 0);
  double cost = 0.0;
  double breaches = 0.0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    const std::size_t i = instance.resource_index(c.genes[j]);
    const auto& r = resources[i];
    if (r.is_dummy) {
      breaches += 1.0;
      continue;
    }
    used[i] += job.pe_count;
    cost += placement_cost(job, r, job.pe_count);
    if (!approx_leq(budget_usage(job, r, job.pe_count, semantics), job.budget_gd)) breaches += 1.0;
    if (!approx_leq(exec_time(job, r), job.deadline_s)) breaches += 1.0;
  }
  for (std::size_t i = 0; i < resources.size(); ++i)
    if (!resources[i].is_dummy && used[i] > resources[i].free_pes) breaches += used[i] - resources[i].free_pes;
  return cost + penalty_weight * breaches;
}

std::vector<double> roulette_weights(std::span<const double> values, std::optional<double> delta) {
  const double worst = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  const double floor = delta ? *delta : (worst == 0.0 ? 1.0 : 1e-6 * std::abs(worst));
  std::vector<double> weights;
  weights.reserve(values.size());
  for (double f : values) weights.push_back((worst - f) + floor);
  return weights;
}

std::pair<std::size_t, std::size_t> roulette_select(std::span<const double> values, std::mt19937_64& rng,
                                                    std::optional<double> delta) {
  const auto weights = roulette_weights(values, delta);
  std::discrete_distribution<std::size_t> wheel(weights.begin(), weights.end());
  const std::size_t first = wheel(rng);
  const std::size_t second = wheel(rng);
  return {first, second};
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b, std::size_t cut) {
  Chromosome x{a.genes, std::nullopt};
  Chromosome y{b.genes, std::nullopt};
  for (std::size_t k = std::min(cut, a.genes.size()); k < a.genes.size(); ++k) std::swap(x.genes[k], y.genes[k]);
  if (cut >= a.genes.size()) {
    x.cached_fitness = a.cached_fitness;
    y.cached_fitness = b.cached_fitness;
  } else if (cut == 0) {
    x.cached_fitness = b.cached_fitness;
    y.cached_fitness = a.cached_fitness;
  }
  return {std::move(x), std::move(y)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> cut(0, a.genes.size());
  return crossover_at(a, b, cut(rng));
}

Chromosome mutate(Chromosome c, std::mt19937_64& rng, double rate, std::span<const ResourceId> resources) {
  if (rate <= 0.0 || resources.empty()) return c;
  std::bernoulli_distribution flip(rate);
  std::uniform_int_distribution<std::size_t> pick(0, resources.size() - 1);
  for (auto& gene : c.genes) {
    if (!flip(rng)) continue;
    gene = resources[pick(rng)];
    c.cached_fitness.reset();
  }
  return c;
}

Chromosome random_chromosome(const Instance& instance, std::mt19937_64& rng) {
  const auto resources = instance.resources();
  std::uniform_int_distribution<std::size_t> pick(0, resources.size() - 1);
  Chromosome c;
  for (std::size_t j = 0; j < instance.jobs().size(); ++j) c.genes.push_back(resources[pick(rng)].id);
  return c;
}

Chromosome to_chromosome(const Schedule& schedule, const Instance& instance) {
  Chromosome c;
  for (const auto& job : instance.jobs()) {
    auto provider = schedule.sole_provider(job.id);
    c.genes.push_back(provider ? *provider : ResourceId::dummy());
  }
  return c;
}

Schedule decode(const Chromosome& c, const Instance& base, BudgetSemantics semantics) {
  const Instance instance = Instance::with_dummy(base);
  const auto jobs = instance.jobs();
  const auto resources = instance.resources();
  std::vector<int> remaining;
  for (const auto& r : resources) remaining.push_back(r.free_pes);
  AllocationMatrix alloc;
  for (std::size_t j : qos_order(jobs)) {
    const auto& job = jobs[j];
    const std::size_t i = instance.resource_index(c.genes[j]);
    const auto& r = resources[i];
    const bool fits = !r.is_dummy && remaining[i] >= job.pe_count && approx_leq(exec_time(job, r), job.deadline_s) &&
                      approx_leq(budget_usage(job, r, job.pe_count, semantics), job.budget_gd);
    if (fits) {
      remaining[i] -= job.pe_count;
      alloc.set(r.id, job.id, job.pe_count);
    } else {
      alloc.set(ResourceId::dummy(), job.id, job.pe_count);
    }
  }
  return make_schedule(alloc, instance);
}

namespace {

double evaluate(Chromosome& c, const Instance& instance, double weight, BudgetSemantics semantics) {
  if (!c.cached_fitness) c.cached_fitness = fitness(c, instance, weight, semantics);
  return *c.cached_fitness;
}

}  // namespace

GaResult run_ga(std::span<const Chromosome> seeds, const Instance& instance, const GaParams& params,
                BudgetSemantics semantics) {
  params.check();
  if (seeds.size() > static_cast<std::size_t>(params.population_size))
    throw BadConfigError("more seed chromosomes than population slots");
  const double weight = params.penalty_weight ? *params.penalty_weight : default_penalty_weight(instance);
  std::vector<ResourceId> resource_ids;
  for (const auto& r : instance.resources()) resource_ids.push_back(r.id);

  std::mt19937_64 rng(params.rng_seed);
  std::vector<Chromosome> population(seeds.begin(), seeds.end());
  while (population.size() < static_cast<std::size_t>(params.population_size))
    population.push_back(random_chromosome(instance, rng));

  GaResult result;
  std::vector<double> values(population.size());
  auto score = [&] {
    for (std::size_t k = 0; k < population.size(); ++k) values[k] = evaluate(population[k], instance, weight, semantics);
    const auto best = std::min_element(values.begin(), values.end()) - values.begin();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    ++result.iterations_used;
    if (result.iterations_used == 1 || values[best] < result.best_fitness) {
      result.best = population[best];
      result.best_fitness = values[best];
    }
    result.best_fitness_trace.push_back(result.best_fitness);
    result.mean_fitness_trace.push_back(mean);
  };

  score();
  int stale = 0;
  std::bernoulli_distribution cross(params.crossover_rate);
  while (result.iterations_used < params.max_iterations && stale < params.convergence_window) {
    std::vector<Chromosome> next;
    next.reserve(population.size());
    next.push_back(result.best);
    while (next.size() < population.size()) {
      const auto [p, q] = roulette_select(values, rng);
      auto children = cross(rng) ? crossover(population[p], population[q], rng)
                                 : std::pair<Chromosome, Chromosome>{population[p], population[q]};
      next.push_back(mutate(std::move(children.first), rng, params.mutation_rate, resource_ids));
      if (next.size() < population.size())
        next.push_back(mutate(std::move(children.second), rng, params.mutation_rate, resource_ids));
    }
    population = std::move(next);
    const double before = result.best_fitness;
    score();
    stale = result.best_fitness < before ? 0 : stale + 1;
  }
  return result;
}

void write_trace_csv(std::ostream& out, const GaResult& result) {
  out << "generation,best_fitness,mean_fitness\n";
  for (std::size_t g = 0; g < result.best_fitness_trace.size(); ++g)
    out << g << ',' << result.best_fitness_trace[g] << ',' << result.mean_fitness_trace[g] << '\n';
}

namespace {

SeededGaResult seeded_run(const Instance& instance, const Schedule& seed, const GaParams& params,
                          BudgetSemantics semantics) {
  SeededGaResult out;
  out.seed = seed;
  if (instance.jobs().empty()) return out;
  const double weight = params.penalty_weight ? *params.penalty_weight : default_penalty_weight(instance);
  const std::vector<Chromosome> seeds = {to_chromosome(seed, instance)};
  out.seed_fitness = fitness(seeds.front(), instance, weight, semantics);
  out.ga = run_ga(seeds, instance, params, semantics);
  out.schedule = decode(out.ga.best, instance, semantics);
  out.final_fitness = fitness(to_chromosome(out.schedule, instance), instance, weight, semantics);
  for (const auto& job : instance.jobs()) out.notifications.push_back({job.id, out.schedule.sole_provider(job.id)});
  return out;
}

}  // namespace

SeededGaResult lpga(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources, const GaParams& params,
                    const EvolutionConfig& config) {
  params.check();
  RelaxedConfig relaxed_config;
  relaxed_config.budget = config.budget;
  relaxed_config.allow_dummy = config.allow_dummy;
  const auto model = build_relaxed(std::move(jobs), std::move(resources), relaxed_config);
  const auto relaxed = solve_relaxed(model);
  const Instance instance = Instance::with_dummy(model.instance());
  MmcConfig mmc_config;
  mmc_config.budget = config.budget;
  const auto seed = modified_min_cost(job_mappings(relaxed, model.instance()), instance, mmc_config);
  return seeded_run(instance, seed, params, config.budget);
}

SeededGaResult hga(std::vector<JobRequest> jobs, std::vector<ResourceInfo> resources, const GaParams& params,
                   const EvolutionConfig& config) {
  params.check();
  const Instance instance = Instance::with_dummy(std::move(jobs), std::move(resources));
  GreedyConfig greedy_config;
  greedy_config.budget = config.budget;
  return seeded_run(instance, greedy_schedule(instance, greedy_config), params, config.budget);
}

}  // namespace metagrid
