#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nsorch/drl/a2c.hpp"
#include "nsorch/drl/agent.hpp"
#include "nsorch/drl/drl_strategy.hpp"
#include "nsorch/execution.hpp"
#include "nsorch/strategies.hpp"
#include "nsorch/topology.hpp"
#include "nsorch/traffic.hpp"

namespace nsorch {

class OrchestratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowSpec {
  SliceClass cls = SliceClass::embb;
  std::string src;
  std::string dst;
  bool operator==(const FlowSpec&) const = default;
};

struct EpisodeConfig {
  std::size_t min_flows = 2;
  std::size_t max_flows = 6;
  double embb_fraction = 0.5;  // probability that a spawned flow is eMBB
  /// When non-empty, every episode uses exactly these flows.
  std::vector<FlowSpec> fixed_flows;
  std::size_t n_slots = 50;
  double slot_s = 0.1;

  void validate(const Topology& topology) const;
  bool operator==(const EpisodeConfig&) const = default;
};

struct TrafficConfig {
  ClassTrafficProfile embb = default_traffic_profile(SliceClass::embb);
  ClassTrafficProfile urllc = default_traffic_profile(SliceClass::urllc);
  std::size_t n_states = 10;
  double stay_prob = 0.6;
  bool operator==(const TrafficConfig&) const = default;
};

/// Everything fixed across the episodes of one experiment.
class Scenario {
 public:
  Scenario(Topology topology, PerformanceModel performance, EpisodeConfig episode, const TrafficConfig& traffic);

  const Topology& topology() const { return topology_; }
  const PerformanceModel& performance() const { return performance_; }
  const EpisodeConfig& episode() const { return episode_; }
  const MarkovDemandModel& model(SliceClass cls) const { return models_[index_of(cls)]; }

 private:
  Topology topology_;
  PerformanceModel performance_;
  EpisodeConfig episode_;
  std::array<MarkovDemandModel, 2> models_;
};

struct SpawnedFlow {
  FlowSpec spec;
  FlowPath path;
  std::size_t initial_state = 0;
  std::uint64_t chain_seed = 0;
};

/// Flow count uniform over the configured range, class Bernoulli, distinct
/// access endpoints, chains started in a uniformly drawn state.
std::vector<SpawnedFlow> spawn_flows(const Scenario& scenario, std::mt19937_64& rng);

/// Seed of episode `episode`; every strategy sees the same flows and demand
/// trajectories for a given (master seed, episode).
std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t episode);

struct EvalRow {
  std::size_t episode = 0;
  std::size_t n_flows = 0;
  double omega = 0.0;
  std::optional<double> omega_e;
  std::optional<double> omega_u;
  double omega_eta = 0.0;
  double omega_c = 0.0;
  double omega_m = 0.0;
  double omega_delta = 0.0;
  bool operator==(const EvalRow&) const = default;
};

/// Utilities averaged over the slots of one episode.
EvalRow run_episode(const Scenario& scenario, AllocationStrategy& strategy, std::size_t episode,
                    std::uint64_t master_seed);

/// Called once per episode with its position in the run and the strategy
/// instance that played it; may run concurrently for different positions.
using EpisodeHook = std::function<void(std::size_t position, const AllocationStrategy& strategy)>;

/// Runs `count` episodes starting at index `first` on fresh clones of
/// `prototype`. Rows come back in episode order regardless of execution.
std::vector<EvalRow> evaluate(const Scenario& scenario, const AllocationStrategy& prototype, std::size_t first,
                              std::size_t count, std::uint64_t master_seed, Execution execution,
                              const EpisodeHook& hook = {});

struct Summary {
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
  bool operator==(const Summary&) const = default;
};

/// Linear-interpolation quantile of sorted data.
double quantile(std::span<const double> sorted, double q);
std::optional<Summary> summarize(std::vector<double> values);

inline const std::array<std::string, 7> kEvalMetrics{"omega",     "omega_e", "omega_u",    "omega_eta",
                                                     "omega_c",   "omega_m", "omega_delta"};

/// Values of `metric` across rows, skipping absent entries.
std::vector<double> metric_values(std::span<const EvalRow> rows, std::string_view metric);
std::map<std::string, std::optional<Summary>> summarize_rows(std::span<const EvalRow> rows);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  std::size_t episodes = 50000;
  std::size_t workers = 1;  // episodes collected per update
  std::size_t checkpoint_every = 0;
  std::size_t first_episode = 0;
  std::uint64_t seed = 0;
  drl::RlConfig rl;
};

/// Learning-curve record. Rewards are ordered rate_e, rate_u, c_e, c_u,
/// m_e, m_u and absent when no agent of that role acted.
struct CurveRow {
  std::size_t episode = 0;
  double omega = 0.0;
  std::optional<double> omega_e;
  std::optional<double> omega_u;
  std::array<std::optional<double>, 6> mean_reward;
  bool operator==(const CurveRow&) const = default;
};

struct TrainStats {
  std::size_t episodes = 0;
  std::size_t updates = 0;
  std::size_t skipped_updates = 0;
};

using CheckpointHook = std::function<void(std::size_t episodes_done, const drl::AgentBundle& bundle)>;

/// Rounds of `workers` sampled episodes, each followed by one A2C update of
/// every agent that acted, on its own transitions.
TrainStats train(const Scenario& scenario, drl::AgentBundle& bundle, const TrainConfig& config,
                 std::vector<CurveRow>& curve, Execution execution = Execution::parallel,
                 const CheckpointHook& on_checkpoint = {});

/// One private copy of each shared agent per (element, class): rate agents
/// on every link, compute and memory agents on every node.
drl::AgentBundle specialize(const Topology& topology, const drl::AgentBundle& source);

/// Specialises `source` and fine-tunes every copy on its own element's
/// transitions for `config.episodes` episodes (zero gives pure replication).
drl::AgentBundle transfer(const Scenario& scenario, const drl::AgentBundle& source, const TrainConfig& config,
                          std::vector<CurveRow>& curve, Execution execution = Execution::parallel,
                          const CheckpointHook& on_checkpoint = {});

}  // namespace nsorch
