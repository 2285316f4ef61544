#pragma once

#include <span>

#include "nsorch/fluidnet.hpp"
#include "nsorch/slices.hpp"

namespace nsorch::drl {

/// `fulfillment` scores granted/requested (requested/granted for delay) so
/// the reward grows with satisfaction; `literal` uses the inverted ratios.
enum class RewardOrientation { fulfillment, literal };

struct RewardWeights {
  double gamma0 = 0.1;  // own flow
  double gamma1 = 1.0;  // flows sharing the element
  RewardOrientation orientation = RewardOrientation::fulfillment;
};

/// Throughput plus delay score of one flow.
double link_score(const PerformanceModel& perf, SliceClass cls, const DemandVector& demand,
                  const AssignedVector& assigned, RewardOrientation orientation);

/// Score of one flow on compute or memory.
double node_score(const PerformanceModel& perf, SliceClass cls, Resource resource, const DemandVector& demand,
                  const AssignedVector& assigned, RewardOrientation orientation);

/// Reward of the rate controller of `flow` on link index `link`.
double reward_link(const PerformanceModel& perf, const FlowLayout& layout, std::span<const DemandVector> demands,
                   const SlotOutcome& outcome, std::size_t flow, std::size_t link, const RewardWeights& w);

/// Reward of the compute or memory controller of `flow` on node index `node`.
double reward_node(const PerformanceModel& perf, const FlowLayout& layout, std::span<const DemandVector> demands,
                   const SlotOutcome& outcome, std::size_t flow, std::size_t node, Resource resource,
                   const RewardWeights& w);

}  // namespace nsorch::drl
