#pragma once

#include <string>
#include <vector>

#include "nsorch/fluidnet.hpp"
#include "nsorch/slices.hpp"
#include "nsorch/topology.hpp"

namespace nsorch::testing {

/// Two access nodes joined by one link, zero fixed delays.
inline Topology pair_topology(double link_bps, double node_capacity) {
  const std::string cap = std::to_string(static_cast<long long>(node_capacity));
  return load_topology(R"({"name":"pair","nodes":[
      {"id":"x","kind":"access","compute_bps":)" + cap + R"(,"memory_bits":)" + cap + R"(,"routing_delay_s":0},
      {"id":"y","kind":"access","compute_bps":)" + cap + R"(,"memory_bits":)" + cap + R"(,"routing_delay_s":0}],
    "links":[{"id":"x-y","a":"x","b":"y","rate_bps":)" + std::to_string(static_cast<long long>(link_bps)) +
                       R"(,"propagation_delay_s":0}]})");
}

/// Best utility reachable by any choice of satisfied URLLC flows: a subset
/// is attainable when granting each member exactly its requirement fits
/// every capacity. Flows outside the subset score zero.
inline double urllc_subset_optimum(const Topology& t, const FlowLayout& layout,
                                   const std::vector<DemandVector>& demands) {
  const std::size_t n = layout.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> link(t.links().size(), 0.0);
    std::vector<double> comp(t.nodes().size(), 0.0);
    std::vector<double> mem(t.nodes().size(), 0.0);
    std::size_t satisfied = 0;
    for (std::size_t f = 0; f < n; ++f) {
      if (!(mask >> f & 1)) continue;
      ++satisfied;
      const Route& r = layout.flow(f).route;
      for (auto l : r.links) link[l] += demands[f].throughput;
      // The whole compute and memory requirement may sit on one node; the
      // cheapest placement is the node with the most spare capacity, and
      // with identical nodes a single node suffices for feasibility here.
      comp[r.nodes.front()] += demands[f].compute;
      mem[r.nodes.front()] += demands[f].memory;
    }
    bool ok = true;
    for (std::size_t i = 0; i < link.size(); ++i) ok = ok && link[i] <= t.link(i).rate_bps;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      ok = ok && comp[i] <= t.node(i).compute_bps && mem[i] <= t.node(i).memory_bits;
    }
    if (ok) best = std::max(best, static_cast<double>(satisfied) / static_cast<double>(n));
  }
  return best;
}

}  // namespace nsorch::testing
