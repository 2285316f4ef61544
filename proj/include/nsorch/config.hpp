#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsorch/drl/a2c.hpp"
#include "nsorch/drl/agent.hpp"
#include "nsorch/drl/observation.hpp"
#include "nsorch/ga.hpp"
#include "nsorch/orchestrator.hpp"
#include "nsorch/topology.hpp"

namespace nsorch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologyConfig {
  std::string builtin = "dumbbell";
  std::string file;  // takes precedence over `builtin` when set
  CapacityOverrides overrides;
  bool operator==(const TopologyConfig&) const = default;
};

struct RunLengths {
  std::size_t train_episodes = 50000;
  std::size_t transfer_episodes = 20000;
  std::size_t eval_episodes = 500;
  std::size_t workers = 1;
  std::size_t checkpoint_every = 5000;
  bool operator==(const RunLengths&) const = default;
};

struct ExperimentConfig {
  std::string preset = "paper";
  std::uint64_t seed = 1;
  TopologyConfig topology;
  EmbbShape embb_shape;
  TrafficConfig traffic;
  bool pyramid_plus = false;  // doubles the URLLC throughput range when the scenario is built
  EpisodeConfig episode;
  drl::RlConfig rl;
  drl::ObservationConfig observation;
  drl::NetworkShape network;
  GaConfig ga;
  RunLengths runs;
  bool eval_sample_actions = false;
  std::vector<std::string> strategies{"empirical", "static:fit"};
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Reference values: full training budget and learning rates.
ExperimentConfig paper_preset();
/// Dumbbell with two fixed flows, short runs and larger learning rates.
ExperimentConfig desk_preset();
ExperimentConfig preset(std::string_view name);

/// Starts from the preset named by the document's "preset" key (default
/// "paper") and overlays every key present. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
/// Full effective configuration; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

/// Throws ConfigError (or the module's own error) on any invalid field.
void validate(const ExperimentConfig& config);

Topology make_topology(const TopologyConfig& config);
Scenario make_scenario(const ExperimentConfig& config);

/// Stream seeds derived from the master seed, so train, transfer and
/// evaluation never reuse episode seeds.
std::uint64_t train_seed(const ExperimentConfig& config);
std::uint64_t transfer_seed(const ExperimentConfig& config);
std::uint64_t eval_seed(const ExperimentConfig& config);

}  // namespace nsorch
