#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "nsorch/drl/a2c.hpp"
#include "nsorch/drl/agent.hpp"
#include "nsorch/strategies.hpp"

namespace nsorch::drl {

/// Transitions of one or more episodes, grouped by the agent that acted.
struct EpisodeBatch {
  std::map<AgentKey, std::vector<Transition>> transitions;

  /// Appends `other` after the transitions already held.
  void merge(EpisodeBatch&& other);
};

/// One local controller per (element, flow, resource), each a replica of the
/// agent resolved for its element. Agents are read-only here; learning
/// happens in the training manager on the collected batch.
class DrlStrategy final : public AllocationStrategy {
 public:
  DrlStrategy(std::shared_ptr<const AgentBundle> bundle, RlConfig rl, bool sample_actions, bool collect);

  std::string name() const override { return "drl"; }
  std::unique_ptr<AllocationStrategy> clone() const override;

  void begin_episode(const EpisodeContext& ctx) override;
  std::vector<FlowDemands> decide(const SlotContext& ctx) override;
  void end_slot(const SlotContext& ctx, const SlotOutcome& outcome) override;
  void end_episode() override;

  /// Moves out the transitions gathered since the last call.
  EpisodeBatch take_batch();

 private:
  struct Controller {
    std::size_t flow = 0;
    AllocationKind kind = AllocationKind::rate;
    std::size_t position = 0;
    std::size_t element = 0;  // link or node index
    const AgentKey* key = nullptr;
    std::optional<std::size_t> last;  // index of its latest transition
  };

  void build_controllers(const Topology& topology, const FlowLayout& layout);

  std::shared_ptr<const AgentBundle> bundle_;
  RlConfig rl_;
  bool sample_;
  bool collect_;
  std::mt19937_64 rng_;
  const FlowLayout* layout_ = nullptr;
  std::vector<Controller> controllers_;
  EpisodeBatch batch_;
};

}  // namespace nsorch::drl
