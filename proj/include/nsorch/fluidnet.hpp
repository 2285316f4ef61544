#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nsorch/slices.hpp"
#include "nsorch/topology.hpp"

namespace nsorch {

class FluidError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Per-element kernels
// ---------------------------------------------------------------------------

/// Proportional feasibility scaling: demands are granted in full when their
/// sum fits the capacity, otherwise each is multiplied by capacity / sum.
std::vector<double> scale_demands(std::span<const double> demands, double capacity);
inline std::vector<double> scale_link_demands(std::span<const double> demands, double rate_capacity) {
  return scale_demands(demands, rate_capacity);
}
inline std::vector<double> scale_node_demands(std::span<const double> demands, double capacity) {
  return scale_demands(demands, capacity);
}

/// Rate entering `link` for a flow on `route`: the source rate on the first
/// link, otherwise the same-slot output of the upstream link.
/// `route_outputs[k]` is the output rate already computed at route position k.
double input_rate(const Route& route, std::size_t link, double source_rate,
                  std::span<const double> route_outputs);

/// min(assigned, backlog/T + input).
double output_rate(double assigned, double backlog_prev, double input, double slot_s);

/// max(0, backlog + T (input - assigned)).
double update_backlog(double backlog_prev, double input, double assigned, double slot_s);

/// Mean queuing time of a bit during the slot, clamped at zero. A link that
/// grants no rate yields +inf if it has anything to carry, 0 otherwise.
double queuing_delay(double backlog_prev, double input, double output, double assigned, double slot_s);

/// Per-bit transmission time 1/output; +inf when nothing leaves the link.
double transmission_delay(double output);

// ---------------------------------------------------------------------------
// Slot composition
// ---------------------------------------------------------------------------

struct FlowPath {
  SliceClass cls = SliceClass::embb;
  Route route;
};

/// Position of a flow on an element: which flow and at which index of its
/// route the element appears.
struct Crossing {
  std::size_t flow = 0;
  std::size_t position = 0;
};

/// Flow routes plus the per-element crossing sets derived from them.
class FlowLayout {
 public:
  FlowLayout(const Topology& topology, std::vector<FlowPath> flows);

  std::size_t size() const { return flows_.size(); }
  const std::vector<FlowPath>& flows() const { return flows_; }
  const FlowPath& flow(std::size_t i) const { return flows_.at(i); }
  const std::vector<Crossing>& link_crossings(std::size_t link) const { return by_link_.at(link); }
  const std::vector<Crossing>& node_crossings(std::size_t node) const { return by_node_.at(node); }
  std::size_t n_links() const { return by_link_.size(); }
  std::size_t n_nodes() const { return by_node_.size(); }

 private:
  std::vector<FlowPath> flows_;
  std::vector<std::vector<Crossing>> by_link_;
  std::vector<std::vector<Crossing>> by_node_;
};

/// Demands emitted for one flow, indexed by route position.
struct FlowDemands {
  std::vector<double> link_rate;  // per route link [bps]
  std::vector<double> compute;    // per route node [bps]
  std::vector<double> memory;     // per route node [bits]

  bool operator==(const FlowDemands&) const = default;
};

struct LinkFlowState {
  double backlog = 0.0;  // end of slot [bits]
  double demanded = 0.0;
  double assigned = 0.0;
  double input = 0.0;
  double output = 0.0;
  double queuing_delay = 0.0;
  double transmission_delay = 0.0;
  double propagation_delay = 0.0;

  double total_delay() const { return queuing_delay + transmission_delay + propagation_delay; }
  bool operator==(const LinkFlowState&) const = default;
};

struct NodeFlowState {
  double demanded_compute = 0.0;
  double demanded_memory = 0.0;
  double assigned_compute = 0.0;
  double assigned_memory = 0.0;
  bool operator==(const NodeFlowState&) const = default;
};

struct FlowSlotState {
  std::vector<LinkFlowState> links;  // per route link
  std::vector<NodeFlowState> nodes;  // per route node
  AssignedVector assigned;
  bool operator==(const FlowSlotState&) const = default;
};

struct SlotOutcome {
  std::size_t slot = 0;
  double slot_s = 0.0;
  std::vector<FlowSlotState> flows;
  bool operator==(const SlotOutcome&) const = default;
};

struct SlotInput {
  std::vector<double> source_rates;                // eta_phi(t)
  std::vector<FlowDemands> demands;                // per flow
  std::vector<std::vector<double>> prev_backlogs;  // per flow, per route link
};

/// All-zero state used before the first slot of an episode.
SlotOutcome initial_outcome(const FlowLayout& layout, double slot_s);
std::vector<std::vector<double>> backlogs_of(const SlotOutcome& outcome);

/// Sums of per-flow delay parts along a route: routing delay of each node plus
/// queuing, transmission and propagation of each link. Any +inf part gives +inf.
double flow_delay(const Topology& topology, const Route& route, std::span<const LinkFlowState> links);

/// Granted vector from a flow's element states.
AssignedVector assigned_vector(const Topology& topology, const Route& route,
                               std::span<const LinkFlowState> links,
                               std::span<const NodeFlowState> nodes);

/// Applies feasibility scaling at every element, propagates each flow's
/// rates along its route in order, updates backlogs and derives the granted
/// vector of every flow. Pure function of its arguments.
SlotOutcome step_slot(const Topology& topology, const FlowLayout& layout, const SlotInput& input,
                      double slot_s, std::size_t slot_index = 0);

}  // namespace nsorch
