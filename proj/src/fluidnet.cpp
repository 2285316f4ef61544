#include "nsorch/fluidnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nsorch {

std::vector<double> scale_demands(std::span<const double> demands, double capacity) {
  double total = 0.0;
  for (double d : demands) {
    if (!(d >= 0) || !std::isfinite(d)) throw FluidError("demands must be non-negative and finite");
    total += d;
  }
  std::vector<double> out(demands.begin(), demands.end());
  if (total > capacity) {
    const double factor = capacity / total;
    for (double& d : out) d *= factor;
  }
  return out;
}

double input_rate(const Route& route, std::size_t link, double source_rate,
                  std::span<const double> route_outputs) {
  const auto it = std::find(route.links.begin(), route.links.end(), link);
  if (it == route.links.end()) throw FluidError("link is not on the flow's route");
  const auto pos = static_cast<std::size_t>(it - route.links.begin());
  if (pos == 0) return source_rate;
  if (pos > route_outputs.size()) throw FluidError("upstream output not yet computed");
  return route_outputs[pos - 1];
}

double output_rate(double assigned, double backlog_prev, double input, double slot_s) {
  return std::min(assigned, backlog_prev / slot_s + input);
}

double update_backlog(double backlog_prev, double input, double assigned, double slot_s) {
  return std::max(0.0, backlog_prev + slot_s * (input - assigned));
}

double queuing_delay(double backlog_prev, double input, double output, double assigned, double slot_s) {
  if (assigned <= 0.0) {
    return (backlog_prev > 0.0 || input > 0.0) ? kUnboundedDelay : 0.0;
  }
  const double tau = (2.0 * backlog_prev - slot_s * (output - input)) / (2.0 * assigned);
  return std::max(0.0, tau);
}

double transmission_delay(double output) { return output > 0.0 ? 1.0 / output : kUnboundedDelay; }

FlowLayout::FlowLayout(const Topology& topology, std::vector<FlowPath> flows)
    : flows_(std::move(flows)),
      by_link_(topology.links().size()),
      by_node_(topology.nodes().size()) {
  for (std::size_t f = 0; f < flows_.size(); ++f) {
    const Route& r = flows_[f].route;
    if (r.nodes.size() != r.links.size() + 1) throw FluidError("malformed route");
    for (std::size_t k = 0; k < r.links.size(); ++k) by_link_.at(r.links[k]).push_back({f, k});
    for (std::size_t k = 0; k < r.nodes.size(); ++k) by_node_.at(r.nodes[k]).push_back({f, k});
  }
}

SlotOutcome initial_outcome(const FlowLayout& layout, double slot_s) {
  SlotOutcome out;
  out.slot = 0;
  out.slot_s = slot_s;
  out.flows.resize(layout.size());
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const Route& r = layout.flow(f).route;
    out.flows[f].links.assign(r.links.size(), LinkFlowState{});
    out.flows[f].nodes.assign(r.nodes.size(), NodeFlowState{});
    out.flows[f].assigned = AssignedVector{0.0, 0.0, 0.0, 0.0};
  }
  return out;
}

std::vector<std::vector<double>> backlogs_of(const SlotOutcome& outcome) {
  std::vector<std::vector<double>> out;
  out.reserve(outcome.flows.size());
  for (const auto& fs : outcome.flows) {
    std::vector<double> b;
    b.reserve(fs.links.size());
    for (const auto& l : fs.links) b.push_back(l.backlog);
    out.push_back(std::move(b));
  }
  return out;
}

double flow_delay(const Topology& topology, const Route& route, std::span<const LinkFlowState> links) {
  double total = 0.0;
  for (std::size_t n : route.nodes) total += topology.node(n).routing_delay_s;
  for (const auto& l : links) {
    const double part = l.total_delay();
    if (std::isinf(part)) return kUnboundedDelay;
    total += part;
  }
  return total;
}

AssignedVector assigned_vector(const Topology& topology, const Route& route,
                               std::span<const LinkFlowState> links,
                               std::span<const NodeFlowState> nodes) {
  AssignedVector a;
  a.compute = 0.0;
  a.memory = 0.0;
  for (const auto& n : nodes) {
    a.compute += n.assigned_compute;
    a.memory += n.assigned_memory;
  }
  a.throughput = links.empty() ? 0.0 : links.back().output;
  a.delay = flow_delay(topology, route, links);
  return a;
}

SlotOutcome step_slot(const Topology& topology, const FlowLayout& layout, const SlotInput& input,
                      double slot_s, std::size_t slot_index) {
  if (!(slot_s > 0)) throw FluidError("slot duration must be positive");
  const std::size_t n_flows = layout.size();
  if (input.source_rates.size() != n_flows || input.demands.size() != n_flows ||
      input.prev_backlogs.size() != n_flows) {
    throw FluidError("slot input does not cover every flow");
  }

  SlotOutcome out;
  out.slot = slot_index;
  out.slot_s = slot_s;
  out.flows.resize(n_flows);
  for (std::size_t f = 0; f < n_flows; ++f) {
    const Route& r = layout.flow(f).route;
    const FlowDemands& d = input.demands[f];
    if (d.link_rate.size() != r.links.size() || d.compute.size() != r.nodes.size() ||
        d.memory.size() != r.nodes.size() || input.prev_backlogs[f].size() != r.links.size()) {
      throw FluidError("missing demand entry for flow " + std::to_string(f));
    }
    out.flows[f].links.resize(r.links.size());
    out.flows[f].nodes.resize(r.nodes.size());
  }

  // Element-wise feasibility scaling.
  std::vector<double> scratch;
  for (std::size_t l = 0; l < layout.n_links(); ++l) {
    const auto& crossing = layout.link_crossings(l);
    if (crossing.empty()) continue;
    scratch.clear();
    for (const auto& c : crossing) scratch.push_back(input.demands[c.flow].link_rate[c.position]);
    const auto granted = scale_link_demands(scratch, topology.link(l).rate_bps);
    for (std::size_t i = 0; i < crossing.size(); ++i) {
      auto& st = out.flows[crossing[i].flow].links[crossing[i].position];
      st.demanded = scratch[i];
      st.assigned = granted[i];
    }
  }
  for (std::size_t n = 0; n < layout.n_nodes(); ++n) {
    const auto& crossing = layout.node_crossings(n);
    if (crossing.empty()) continue;
    for (int pass = 0; pass < 2; ++pass) {
      const bool compute = pass == 0;
      scratch.clear();
      for (const auto& c : crossing) {
        const auto& d = input.demands[c.flow];
        scratch.push_back(compute ? d.compute[c.position] : d.memory[c.position]);
      }
      const auto& node = topology.node(n);
      const auto granted = scale_node_demands(scratch, compute ? node.compute_bps : node.memory_bits);
      for (std::size_t i = 0; i < crossing.size(); ++i) {
        auto& st = out.flows[crossing[i].flow].nodes[crossing[i].position];
        (compute ? st.demanded_compute : st.demanded_memory) = scratch[i];
        (compute ? st.assigned_compute : st.assigned_memory) = granted[i];
      }
    }
  }

  // Rate propagation, upstream to downstream within the slot.
  std::vector<double> outputs;
  for (std::size_t f = 0; f < n_flows; ++f) {
    const Route& r = layout.flow(f).route;
    auto& fs = out.flows[f];
    outputs.clear();
    for (std::size_t k = 0; k < r.links.size(); ++k) {
      auto& st = fs.links[k];
      const double backlog_prev = input.prev_backlogs[f][k];
      st.input = input_rate(r, r.links[k], input.source_rates[f], outputs);
      st.output = output_rate(st.assigned, backlog_prev, st.input, slot_s);
      st.backlog = update_backlog(backlog_prev, st.input, st.assigned, slot_s);
      st.queuing_delay = queuing_delay(backlog_prev, st.input, st.output, st.assigned, slot_s);
      st.transmission_delay = transmission_delay(st.output);
      st.propagation_delay = topology.link(r.links[k]).propagation_delay_s;
      outputs.push_back(st.output);
    }
    fs.assigned = assigned_vector(topology, r, fs.links, fs.nodes);
  }
  return out;
}

}  // namespace nsorch
