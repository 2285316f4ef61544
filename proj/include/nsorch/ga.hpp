#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nsorch/execution.hpp"
#include "nsorch/strategies.hpp"

namespace nsorch {

struct GaConfig {
  std::size_t population = 64;
  std::size_t generations = 300;
  double crossover_rate = 0.9;
  double mutation_rate = 0.05;
  double mutation_scale = 0.1;  // std-dev as a fraction of the gene's capacity
  std::size_t elitism = 2;
  std::size_t tournament = 3;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const GaConfig&) const = default;
};

/// Utility of a fixed allocation on a single fluid slot started from empty
/// queues, with every flow demanding its average requirement.
class StaticFitness {
 public:
  StaticFitness(const Topology& topology, const FlowLayout& layout, const PerformanceModel& performance,
                std::span<const DemandVector> average_demands, double slot_s);

  double operator()(const std::vector<FlowDemands>& allocation) const;

 private:
  const Topology* topology_;
  const FlowLayout* layout_;
  const PerformanceModel* performance_;
  std::vector<DemandVector> demands_;
  double slot_s_;
};

/// Flat real-valued chromosome: every (link, flow) rate followed by every
/// (node, flow) compute and memory amount, in route order per flow.
class GenomeCodec {
 public:
  GenomeCodec(const Topology& topology, const FlowLayout& layout);

  std::size_t size() const { return upper_.size(); }
  double upper_bound(std::size_t gene) const { return upper_[gene]; }
  std::vector<FlowDemands> decode(std::span<const double> genes) const;
  std::vector<double> encode(const std::vector<FlowDemands>& amounts) const;
  /// Projects a chromosome onto the feasible set in place.
  void repair(std::vector<double>& genes) const;

 private:
  const Topology* topology_;
  const FlowLayout* layout_;
  std::vector<double> upper_;
};

/// Fitness of each individual. The serial and parallel paths must agree
/// bit for bit.
std::vector<double> evaluate_population(const StaticFitness& fitness, const GenomeCodec& codec,
                                        const std::vector<std::vector<double>>& population,
                                        Execution execution);

struct GaResult {
  StaticAllocation allocation;
  double best_fitness = 0.0;
  std::vector<double> initial_fitness;
  /// Best fitness of the population after each generation (index 0 is the
  /// initial population).
  std::vector<double> best_per_generation;
};

GaResult ga_optimize(const Topology& topology, const FlowLayout& layout, const PerformanceModel& performance,
                     std::span<const DemandVector> average_demands, const GaConfig& config, double slot_s,
                     Execution execution = Execution::parallel);

/// Fixed allocation applied unchanged every slot. Either fitted per episode
/// by the GA against average demands, or read back from a stored plan.
class StaticStrategy final : public AllocationStrategy {
 public:
  explicit StaticStrategy(GaConfig config);
  explicit StaticStrategy(std::shared_ptr<const StaticPlan> plan);

  std::string name() const override { return plan_ ? "static:file" : "static:fit"; }
  std::unique_ptr<AllocationStrategy> clone() const override;

  void begin_episode(const EpisodeContext& ctx) override;
  std::vector<FlowDemands> decide(const SlotContext& ctx) override;

  const std::optional<StaticPlanEntry>& last_plan_entry() const { return last_entry_; }
  std::optional<double> last_fitness() const { return last_fitness_; }

 private:
  GaConfig config_;
  std::shared_ptr<const StaticPlan> plan_;
  std::optional<StaticAllocation> current_;
  std::optional<StaticPlanEntry> last_entry_;
  std::optional<double> last_fitness_;
};

}  // namespace nsorch
