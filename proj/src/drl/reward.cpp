#include "nsorch/drl/reward.hpp"

#include <limits>

#include "nsorch/drl/mlp.hpp"

namespace nsorch::drl {

namespace {

double ratio(double num, double den) {
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

double score(const PerformanceModel& perf, SliceClass cls, Resource r, const DemandVector& d,
             const AssignedVector& g, RewardOrientation o) {
  if (o == RewardOrientation::fulfillment) return perf.resource_score(cls, r, d, g);
  const double x = r == Resource::delay ? ratio(g.delay, d.delay) : ratio(d.get(r), g.get(r));
  return perf.f(cls, x);
}

void check(const FlowLayout& layout, std::span<const DemandVector> demands, const SlotOutcome& outcome,
           std::size_t flow) {
  if (demands.size() != layout.size() || outcome.flows.size() != layout.size() || flow >= layout.size()) {
    throw DrlError("reward inputs do not match the flow layout");
  }
}

}  // namespace

double link_score(const PerformanceModel& perf, SliceClass cls, const DemandVector& demand,
                  const AssignedVector& assigned, RewardOrientation orientation) {
  return score(perf, cls, Resource::throughput, demand, assigned, orientation) +
         score(perf, cls, Resource::delay, demand, assigned, orientation);
}

double node_score(const PerformanceModel& perf, SliceClass cls, Resource resource, const DemandVector& demand,
                  const AssignedVector& assigned, RewardOrientation orientation) {
  if (resource != Resource::compute && resource != Resource::memory) {
    throw DrlError("node rewards are defined for compute and memory only");
  }
  return score(perf, cls, resource, demand, assigned, orientation);
}

double reward_link(const PerformanceModel& perf, const FlowLayout& layout, std::span<const DemandVector> demands,
                   const SlotOutcome& outcome, std::size_t flow, std::size_t link, const RewardWeights& w) {
  check(layout, demands, outcome, flow);
  auto s = [&](std::size_t f) {
    return link_score(perf, layout.flow(f).cls, demands[f], outcome.flows[f].assigned, w.orientation);
  };
  const auto& sharing = layout.link_crossings(link);
  if (sharing.empty()) throw DrlError("flow does not cross the rewarded link");
  double shared = 0.0;
  for (const Crossing& c : sharing) shared += s(c.flow);
  return w.gamma0 * s(flow) + w.gamma1 * shared / static_cast<double>(sharing.size());
}

double reward_node(const PerformanceModel& perf, const FlowLayout& layout, std::span<const DemandVector> demands,
                   const SlotOutcome& outcome, std::size_t flow, std::size_t node, Resource resource,
                   const RewardWeights& w) {
  check(layout, demands, outcome, flow);
  auto s = [&](std::size_t f) {
    return node_score(perf, layout.flow(f).cls, resource, demands[f], outcome.flows[f].assigned, w.orientation);
  };
  const auto& sharing = layout.node_crossings(node);
  if (sharing.empty()) throw DrlError("flow does not cross the rewarded node");
  double shared = 0.0;
  for (const Crossing& c : sharing) shared += s(c.flow);
  return w.gamma0 * s(flow) + w.gamma1 * shared / static_cast<double>(sharing.size());
}

}  // namespace nsorch::drl
