#include "nsorch/ga.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "nsorch/traffic.hpp"

namespace nsorch {

void GaConfig::validate() const {
  if (population < 2) throw StrategyError("GA population must hold at least two individuals");
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(crossover_rate) || !in_unit(mutation_rate)) throw StrategyError("GA rates must lie in [0,1]");
  if (!(mutation_scale >= 0.0)) throw StrategyError("GA mutation scale must be non-negative");
  if (elitism > population) throw StrategyError("GA elitism exceeds the population");
  if (tournament < 1) throw StrategyError("GA tournament size must be positive");
}

StaticFitness::StaticFitness(const Topology& topology, const FlowLayout& layout,
                             const PerformanceModel& performance, std::span<const DemandVector> average_demands,
                             double slot_s)
    : topology_(&topology),
      layout_(&layout),
      performance_(&performance),
      demands_(average_demands.begin(), average_demands.end()),
      slot_s_(slot_s) {
  if (demands_.size() != layout.size()) throw StrategyError("average demands do not cover every flow");
}

double StaticFitness::operator()(const std::vector<FlowDemands>& allocation) const {
  SlotInput in;
  in.demands = allocation;
  in.source_rates.reserve(demands_.size());
  for (const auto& d : demands_) in.source_rates.push_back(d.throughput);
  for (std::size_t f = 0; f < layout_->size(); ++f) {
    in.prev_backlogs.emplace_back(layout_->flow(f).route.links.size(), 0.0);
  }
  const SlotOutcome out = step_slot(*topology_, *layout_, in, slot_s_);
  std::vector<FlowSample> samples;
  samples.reserve(demands_.size());
  for (std::size_t f = 0; f < demands_.size(); ++f) {
    samples.push_back({layout_->flow(f).cls, demands_[f], out.flows[f].assigned});
  }
  return system_utility(*performance_, samples).overall;
}

GenomeCodec::GenomeCodec(const Topology& topology, const FlowLayout& layout)
    : topology_(&topology), layout_(&layout) {
  for (const auto& path : layout.flows()) {
    for (std::size_t l : path.route.links) upper_.push_back(topology.link(l).rate_bps);
    for (std::size_t n : path.route.nodes) upper_.push_back(topology.node(n).compute_bps);
    for (std::size_t n : path.route.nodes) upper_.push_back(topology.node(n).memory_bits);
  }
}

std::vector<FlowDemands> GenomeCodec::decode(std::span<const double> genes) const {
  if (genes.size() != upper_.size()) throw StrategyError("chromosome length mismatch");
  std::vector<FlowDemands> out(layout_->size());
  std::size_t g = 0;
  for (std::size_t f = 0; f < layout_->size(); ++f) {
    const Route& r = layout_->flow(f).route;
    auto& d = out[f];
    d.link_rate.assign(genes.begin() + g, genes.begin() + g + r.links.size());
    g += r.links.size();
    d.compute.assign(genes.begin() + g, genes.begin() + g + r.nodes.size());
    g += r.nodes.size();
    d.memory.assign(genes.begin() + g, genes.begin() + g + r.nodes.size());
    g += r.nodes.size();
  }
  return out;
}

std::vector<double> GenomeCodec::encode(const std::vector<FlowDemands>& amounts) const {
  std::vector<double> genes;
  genes.reserve(upper_.size());
  for (const auto& d : amounts) {
    genes.insert(genes.end(), d.link_rate.begin(), d.link_rate.end());
    genes.insert(genes.end(), d.compute.begin(), d.compute.end());
    genes.insert(genes.end(), d.memory.begin(), d.memory.end());
  }
  if (genes.size() != upper_.size()) throw StrategyError("allocation does not match the layout");
  return genes;
}

void GenomeCodec::repair(std::vector<double>& genes) const {
  auto amounts = decode(genes);
  project_feasible(*topology_, *layout_, amounts);
  genes = encode(amounts);
}

std::vector<double> evaluate_population(const StaticFitness& fitness, const GenomeCodec& codec,
                                        const std::vector<std::vector<double>>& population,
                                        Execution execution) {
  const auto n = static_cast<std::ptrdiff_t>(population.size());
  std::vector<double> out(population.size(), 0.0);
  if (execution == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = fitness(codec.decode(population[i]));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = fitness(codec.decode(population[i]));
  }
  return out;
}

GaResult ga_optimize(const Topology& topology, const FlowLayout& layout, const PerformanceModel& performance,
                     std::span<const DemandVector> average_demands, const GaConfig& config, double slot_s,
                     Execution execution) {
  config.validate();
  const StaticFitness fitness(topology, layout, performance, average_demands, slot_s);
  const GenomeCodec codec(topology, layout);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  using Genome = std::vector<double>;
  std::vector<Genome> pop(config.population, Genome(codec.size()));
  for (auto& g : pop) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = unit_uniform(rng) * codec.upper_bound(i);
    codec.repair(g);
  }
  std::vector<double> fit = evaluate_population(fitness, codec, pop, execution);

  GaResult result;
  result.initial_fitness = fit;

  auto ranking = [&]() {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    return order;
  };
  auto tournament = [&]() {
    std::size_t best = static_cast<std::size_t>(rng() % pop.size());
    for (std::size_t k = 1; k < config.tournament; ++k) {
      const auto c = static_cast<std::size_t>(rng() % pop.size());
      if (fit[c] > fit[best]) best = c;
    }
    return best;
  };

  auto order = ranking();
  Genome best = pop[order.front()];
  double best_fit = fit[order.front()];
  result.best_per_generation.push_back(best_fit);

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    std::vector<Genome> next;
    std::vector<double> next_fit;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < config.elitism; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    const std::size_t n_elite = next.size();
    while (next.size() < pop.size()) {
      const Genome& a = pop[tournament()];
      const Genome& b = pop[tournament()];
      Genome child = a;
      if (unit_uniform(rng) < config.crossover_rate) {
        for (std::size_t i = 0; i < child.size(); ++i) {
          if (rng() & 1ULL) child[i] = b[i];
        }
      }
      for (std::size_t i = 0; i < child.size(); ++i) {
        if (unit_uniform(rng) < config.mutation_rate) {
          const double cap = codec.upper_bound(i);
          child[i] = std::clamp(child[i] + gauss(rng) * config.mutation_scale * cap, 0.0, cap);
        }
      }
      codec.repair(child);
      next.push_back(std::move(child));
    }
    const std::vector<Genome> offspring(next.begin() + static_cast<std::ptrdiff_t>(n_elite), next.end());
    const auto offspring_fit = evaluate_population(fitness, codec, offspring, execution);
    next_fit.insert(next_fit.end(), offspring_fit.begin(), offspring_fit.end());

    pop = std::move(next);
    fit = std::move(next_fit);
    order = ranking();
    if (fit[order.front()] > best_fit) {
      best_fit = fit[order.front()];
      best = pop[order.front()];
    }
    result.best_per_generation.push_back(fit[order.front()]);
  }

  result.best_fitness = best_fit;
  result.allocation = StaticAllocation(topology, layout, codec.decode(best));
  return result;
}

StaticStrategy::StaticStrategy(GaConfig config) : config_(config) { config_.validate(); }

StaticStrategy::StaticStrategy(std::shared_ptr<const StaticPlan> plan) : plan_(std::move(plan)) {
  if (!plan_) throw StrategyError("static strategy needs a plan");
}

std::unique_ptr<AllocationStrategy> StaticStrategy::clone() const {
  auto copy = plan_ ? std::make_unique<StaticStrategy>(plan_) : std::make_unique<StaticStrategy>(config_);
  return copy;
}

void StaticStrategy::begin_episode(const EpisodeContext& ctx) {
  if (plan_) {
    const auto* entry = plan_->find(ctx.episode);
    if (entry == nullptr) {
      throw StrategyError("static plan has no allocation for episode " + std::to_string(ctx.episode));
    }
    current_ = allocation_from_plan(*ctx.topology, *ctx.layout, *entry);
    last_fitness_.reset();
  } else {
    GaConfig cfg = config_;
    cfg.seed = derive_seed(config_.seed, ctx.seed, 0x6a);
    // Episode-level workers already run in parallel.
    auto result = ga_optimize(*ctx.topology, *ctx.layout, *ctx.performance, ctx.average_demands, cfg,
                              ctx.slot_s, Execution::serial);
    current_ = std::move(result.allocation);
    last_fitness_ = result.best_fitness;
  }
  last_entry_ = make_plan_entry(*ctx.topology, *ctx.layout, ctx.episode, *current_);
}

std::vector<FlowDemands> StaticStrategy::decide(const SlotContext& /*ctx*/) {
  if (!current_) throw StrategyError("static strategy used outside an episode");
  return current_->amounts();
}

}  // namespace nsorch
