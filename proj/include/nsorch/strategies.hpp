#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nsorch/fluidnet.hpp"
#include "nsorch/slices.hpp"
#include "nsorch/topology.hpp"

namespace nsorch {

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What a strategy may know about an episode before its first slot.
struct EpisodeContext {
  const Topology* topology = nullptr;
  const FlowLayout* layout = nullptr;
  const PerformanceModel* performance = nullptr;
  std::span<const DemandVector> average_demands;  // per flow, stationary mean
  double slot_s = 0.1;
  std::size_t episode = 0;
  std::uint64_t seed = 0;
};

/// Slot-start information: current requirements and the previous outcome
/// (the all-zero initial outcome in the first slot).
struct SlotContext {
  const Topology* topology = nullptr;
  const FlowLayout* layout = nullptr;
  const PerformanceModel* performance = nullptr;
  std::span<const DemandVector> demands;
  const SlotOutcome* previous = nullptr;
  double slot_s = 0.1;
  std::size_t slot = 0;
};

/// Emits b*, c* and m* for every (element, flow) pair each slot.
class AllocationStrategy {
 public:
  virtual ~AllocationStrategy() = default;

  virtual std::string name() const = 0;
  /// Fresh instance with the same configuration, for use on another worker.
  virtual std::unique_ptr<AllocationStrategy> clone() const = 0;

  virtual void begin_episode(const EpisodeContext& /*ctx*/) {}
  virtual std::vector<FlowDemands> decide(const SlotContext& ctx) = 0;
  virtual void end_slot(const SlotContext& /*ctx*/, const SlotOutcome& /*outcome*/) {}
  virtual void end_episode() {}
};

/// Throws StrategyError if any demand is negative or non-finite, or if the
/// shape does not match the layout.
void check_demands(const FlowLayout& layout, std::span<const FlowDemands> demands);

// ---------------------------------------------------------------------------
// Empirical strategy
// ---------------------------------------------------------------------------

/// Rate sufficient for the current requirement plus the queued data.
double empirical_link_demand(double throughput, double backlog_prev, double slot_s);

/// Share of a flow's requirement asked of node `position` on its route,
/// proportional to that node's capacity for the resource.
double empirical_node_demand(const Topology& topology, const Route& route, std::size_t position,
                             Resource resource, double requirement);

class EmpiricalStrategy final : public AllocationStrategy {
 public:
  std::string name() const override { return "empirical"; }
  std::unique_ptr<AllocationStrategy> clone() const override {
    return std::make_unique<EmpiricalStrategy>(*this);
  }
  std::vector<FlowDemands> decide(const SlotContext& ctx) override;
};

// ---------------------------------------------------------------------------
// Static allocation
// ---------------------------------------------------------------------------

enum class ElementKind { link, node };
enum class AllocationKind { rate, compute, memory };

std::string_view to_string(AllocationKind kind);
AllocationKind allocation_kind_from_string(std::string_view text);

/// Fixed per-(element, flow) amounts that satisfy the capacity constraints.
class StaticAllocation {
 public:
  StaticAllocation() = default;
  /// Validates shape and feasibility against the topology.
  StaticAllocation(const Topology& topology, const FlowLayout& layout, std::vector<FlowDemands> amounts);

  const std::vector<FlowDemands>& amounts() const { return amounts_; }

  /// Stored constant for `kind` at `element` (link or node index) for `flow`.
  double amount(const FlowLayout& layout, std::size_t element, std::size_t flow, AllocationKind kind) const;

 private:
  std::vector<FlowDemands> amounts_;
};

/// Per-element proportional projection onto the feasible set, applied to
/// raw per-flow amounts in place.
void project_feasible(const Topology& topology, const FlowLayout& layout, std::vector<FlowDemands>& amounts);

/// One flow of a stored static allocation, with the element ids along its
/// route so a plan can be checked against the episode it is applied to.
struct StaticPlanFlow {
  SliceClass cls = SliceClass::embb;
  std::string src;
  std::string dst;
  std::vector<std::string> link_ids;
  std::vector<std::string> node_ids;
  FlowDemands amounts;
};

struct StaticPlanEntry {
  std::size_t episode = 0;
  std::vector<StaticPlanFlow> flows;
};

/// Static allocations keyed by episode index, for reuse across evaluation
/// runs with identical seeds.
struct StaticPlan {
  std::vector<StaticPlanEntry> entries;

  std::string dump() const;
  static StaticPlan parse(std::string_view text);
  static StaticPlan load(const std::string& path);
  const StaticPlanEntry* find(std::size_t episode) const;
};

StaticPlanEntry make_plan_entry(const Topology& topology, const FlowLayout& layout, std::size_t episode,
                                const StaticAllocation& allocation);

/// Converts a stored entry back to an allocation, throwing StrategyError if
/// the flows or routes differ from `layout`.
StaticAllocation allocation_from_plan(const Topology& topology, const FlowLayout& layout,
                                      const StaticPlanEntry& entry);

}  // namespace nsorch
