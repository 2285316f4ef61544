#pragma once

// Reference implementations used only by the tests. Each one is written
// directly from the model definitions, without calling the code under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "nsorch/fluidnet.hpp"
#include "nsorch/topology.hpp"
#include "nsorch/traffic.hpp"

namespace nsorch::testing {

/// Slot-average waiting time of a fluid queue that starts with `backlog`
/// bits, receives `input` and is served at `assigned`, integrated with the
/// midpoint rule over `steps` sub-steps.
inline double queuing_oracle(double backlog, double input, double assigned, double slot_s, std::size_t steps) {
  const double du = slot_s / static_cast<double>(steps);
  double acc = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double u = (static_cast<double>(k) + 0.5) * du;
    const double q = std::max(0.0, backlog - u * (assigned - input));
    acc += q / assigned;
  }
  return acc / static_cast<double>(steps);
}

/// True when the queue stays non-empty for the whole slot.
inline bool queue_persists(double backlog, double input, double assigned, double slot_s) {
  return backlog + slot_s * (input - assigned) >= 0.0;
}

/// Stationary distribution of a chain by repeated multiplication with its
/// transition matrix, starting from uniform.
inline std::vector<double> power_iteration(const MarkovDemandModel& m, std::size_t iters = 20000) {
  const std::size_t n = m.n_states();
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t it = 0; it < iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[j] += p[i] * m.transition(i, j);
    }
    // Lazy step keeps periodic chains (stay probability 0) convergent.
    for (std::size_t j = 0; j < n; ++j) p[j] = 0.5 * (p[j] + next[j]);
  }
  return p;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

/// Random set of flows between distinct access nodes.
inline FlowLayout random_layout(const Topology& t, std::mt19937_64& rng, std::size_t n_flows) {
  const auto access = t.access_nodes();
  std::uniform_int_distribution<std::size_t> pick(0, access.size() - 1);
  std::vector<FlowPath> flows;
  for (std::size_t f = 0; f < n_flows; ++f) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    flows.push_back({(rng() & 1) ? SliceClass::embb : SliceClass::urllc,
                     t.route(t.node(access[a]).id, t.node(access[b]).id)});
  }
  return FlowLayout(t, std::move(flows));
}

/// Demands drawn uniformly in [0, scale * capacity] per element.
inline std::vector<FlowDemands> random_demands(const Topology& t, const FlowLayout& layout, std::mt19937_64& rng,
                                               double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<FlowDemands> d(layout.size());
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const Route& r = layout.flow(f).route;
    for (auto l : r.links) d[f].link_rate.push_back(u(rng) * t.link(l).rate_bps);
    for (auto n : r.nodes) {
      d[f].compute.push_back(u(rng) * t.node(n).compute_bps);
      d[f].memory.push_back(u(rng) * t.node(n).memory_bits);
    }
  }
  return d;
}

/// Largest ratio of granted aggregate to capacity over every element.
inline double worst_load(const Topology& t, const FlowLayout& layout, const SlotOutcome& out) {
  std::vector<double> link(t.links().size(), 0.0);
  std::vector<double> comp(t.nodes().size(), 0.0);
  std::vector<double> mem(t.nodes().size(), 0.0);
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const Route& r = layout.flow(f).route;
    for (std::size_t k = 0; k < r.links.size(); ++k) link[r.links[k]] += out.flows[f].links[k].assigned;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      comp[r.nodes[k]] += out.flows[f].nodes[k].assigned_compute;
      mem[r.nodes[k]] += out.flows[f].nodes[k].assigned_memory;
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < link.size(); ++i) worst = std::max(worst, link[i] / t.link(i).rate_bps);
  for (std::size_t i = 0; i < comp.size(); ++i) {
    worst = std::max(worst, comp[i] / t.node(i).compute_bps);
    worst = std::max(worst, mem[i] / t.node(i).memory_bits);
  }
  return worst;
}

}  // namespace nsorch::testing
