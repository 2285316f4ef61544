#include "nsorch/drl/agent.hpp"

#include <algorithm>
#include <cmath>

#include "nsorch/traffic.hpp"

namespace nsorch::drl {

Agent make_agent(AgentRole role, const ObservationConfig& obs, const NetworkShape& shape, double lr_actor,
                 double lr_critic, double initial_log_std, std::mt19937_64& rng) {
  const auto& hidden = role.kind == AllocationKind::rate ? shape.rate_hidden : shape.node_hidden;
  std::vector<std::size_t> sizes{obs.input_size(role.kind)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  Agent a;
  a.role = role;
  a.actor = Mlp::he_init(sizes, rng, shape.actor_output_gain);
  a.critic = Mlp::he_init(sizes, rng);
  a.log_std = initial_log_std;
  a.actor_adam = AdamState(a.actor.n_params() + 1, lr_actor);
  a.critic_adam = AdamState(a.critic.n_params(), lr_critic);
  return a;
}

double logistic(double x) {
  const double z = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

ActResult act(const Agent& agent, std::span<const double> observation, double capacity, std::mt19937_64* rng) {
  ActResult r;
  r.mean = agent.actor.forward_scalar(observation);
  r.raw = r.mean;
  if (rng != nullptr) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    r.raw += std::exp(agent.log_std) * gauss(*rng);
  }
  r.demand = capacity * logistic(r.raw);
  return r;
}

std::string to_string(const AgentKey& key) {
  return key.scope + "/" + std::string(nsorch::to_string(key.cls)) + "/" + std::string(nsorch::to_string(key.kind));
}

const AgentKey& AgentBundle::resolve(std::string_view element_id, SliceClass cls, AllocationKind kind) const {
  auto it = agents.find(AgentKey{std::string(element_id), cls, kind});
  if (it != agents.end()) return it->first;
  it = agents.find(AgentKey{std::string(kSharedScope), cls, kind});
  if (it != agents.end()) return it->first;
  throw DrlError("no agent for element '" + std::string(element_id) + "', class " +
                 std::string(nsorch::to_string(cls)) + ", resource " + std::string(nsorch::to_string(kind)));
}

const Agent& AgentBundle::at(const AgentKey& key) const {
  auto it = agents.find(key);
  if (it == agents.end()) throw DrlError("unknown agent " + to_string(key));
  return it->second;
}

Agent& AgentBundle::at(const AgentKey& key) {
  auto it = agents.find(key);
  if (it == agents.end()) throw DrlError("unknown agent " + to_string(key));
  return it->second;
}

AgentBundle make_generalist_bundle(const ObservationConfig& obs, const NetworkShape& shape, double lr_actor,
                                   double lr_critic, double initial_log_std, std::uint64_t seed) {
  obs.validate();
  AgentBundle bundle;
  bundle.observation = obs;
  std::uint64_t k = 0;
  for (SliceClass cls : kSliceClasses) {
    for (AllocationKind kind : {AllocationKind::rate, AllocationKind::compute, AllocationKind::memory}) {
      std::mt19937_64 rng(derive_seed(seed, 0xA9E47, k++));
      bundle.agents.emplace(AgentKey{std::string(kSharedScope), cls, kind},
                            make_agent({cls, kind}, obs, shape, lr_actor, lr_critic, initial_log_std, rng));
    }
  }
  return bundle;
}

}  // namespace nsorch::drl
