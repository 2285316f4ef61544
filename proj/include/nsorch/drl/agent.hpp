#pragma once

#include <compare>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nsorch/drl/adam.hpp"
#include "nsorch/drl/mlp.hpp"
#include "nsorch/drl/observation.hpp"
#include "nsorch/slices.hpp"
#include "nsorch/strategies.hpp"

namespace nsorch::drl {

struct AgentRole {
  SliceClass cls = SliceClass::embb;
  AllocationKind kind = AllocationKind::rate;
  bool operator==(const AgentRole&) const = default;
};

struct NetworkShape {
  std::vector<std::size_t> rate_hidden{12, 6};
  std::vector<std::size_t> node_hidden{8, 4};
  // Small initial actor head: every agent starts near half capacity.
  double actor_output_gain = 0.01;
  bool operator==(const NetworkShape&) const = default;
};

/// Actor (mean of a Gaussian over a pre-squash action), critic (state value)
/// and the learnable log standard deviation. The actor's Adam state also
/// covers log_std, stored after the network parameters.
struct Agent {
  AgentRole role;
  Mlp actor;
  Mlp critic;
  double log_std = 0.0;
  AdamState actor_adam;
  AdamState critic_adam;

  bool operator==(const Agent&) const = default;
};

Agent make_agent(AgentRole role, const ObservationConfig& obs, const NetworkShape& shape, double lr_actor,
                 double lr_critic, double initial_log_std, std::mt19937_64& rng);

double logistic(double x);

struct ActResult {
  double mean = 0.0;    // actor output
  double raw = 0.0;     // pre-squash action
  double demand = 0.0;  // capacity * logistic(raw)
};

/// Deterministic (mean action) when `rng` is null, otherwise samples the
/// Gaussian policy.
ActResult act(const Agent& agent, std::span<const double> observation, double capacity, std::mt19937_64* rng);

inline constexpr std::string_view kSharedScope = "*";

/// Scope is kSharedScope for agents shared by every element, or the id of
/// the link or node a specialised agent belongs to.
struct AgentKey {
  std::string scope{kSharedScope};
  SliceClass cls = SliceClass::embb;
  AllocationKind kind = AllocationKind::rate;
  auto operator<=>(const AgentKey&) const = default;
};

std::string to_string(const AgentKey& key);

struct AgentBundle {
  ObservationConfig observation;
  std::map<AgentKey, Agent> agents;

  /// Key of the agent controlling (`element_id`, class, kind): the
  /// element's own agent if present, else the shared one. Throws if neither.
  const AgentKey& resolve(std::string_view element_id, SliceClass cls, AllocationKind kind) const;
  const Agent& at(const AgentKey& key) const;
  Agent& at(const AgentKey& key);

  bool operator==(const AgentBundle&) const = default;
};

/// One shared agent per (class, resource kind).
AgentBundle make_generalist_bundle(const ObservationConfig& obs, const NetworkShape& shape, double lr_actor,
                                   double lr_critic, double initial_log_std, std::uint64_t seed);

}  // namespace nsorch::drl
