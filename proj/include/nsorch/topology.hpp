#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nsorch {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { access, core };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::core;
  double compute_bps = 0.0;
  double memory_bits = 0.0;
  double routing_delay_s = 0.0;

  bool operator==(const Node&) const = default;
};

struct Link {
  std::string id;
  std::string a;
  std::string b;
  double rate_bps = 0.0;
  double propagation_delay_s = 0.0;

  bool operator==(const Link&) const = default;
};

/// Static path of a flow. Indices refer to Topology::nodes() / links().
struct Route {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> links;

  bool operator==(const Route&) const = default;
};

/// Immutable network graph. Construction validates every invariant, so a
/// Topology value is always well-formed.
class Topology {
 public:
  Topology(std::string name, std::vector<Node> nodes, std::vector<Link> links);

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Link& link(std::size_t i) const { return links_.at(i); }

  std::size_t node_index(std::string_view id) const;
  std::size_t link_index(std::string_view id) const;
  std::optional<std::size_t> find_node(std::string_view id) const;

  /// Link indices incident to node i, sorted by link id.
  const std::vector<std::size_t>& incident_links(std::size_t i) const { return adjacency_.at(i); }
  std::size_t other_end(std::size_t link, std::size_t node) const;

  std::vector<std::size_t> access_nodes() const;

  /// Hop-count shortest path between two access nodes. Only core nodes are
  /// used for transit. Among equal-length paths the lexicographically
  /// smallest node-id sequence wins; among parallel links the smallest id.
  Route route(std::string_view src, std::string_view dst) const;
  Route route(std::size_t src, std::size_t dst) const;

  bool operator==(const Topology& other) const {
    return nodes_ == other.nodes_ && links_ == other.links_;
  }

 private:
  std::vector<std::size_t> hop_distances_to(std::size_t dst) const;

  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, std::size_t> node_by_id_;
  std::unordered_map<std::string, std::size_t> link_by_id_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> endpoint_a_;
  std::vector<std::size_t> endpoint_b_;
};

struct CapacityOverrides {
  std::optional<double> link_rate_bps;
  std::optional<double> link_propagation_delay_s;
  std::optional<double> node_routing_delay_s;
  std::optional<double> core_compute_bps;
  std::optional<double> core_memory_bits;
  std::optional<double> access_compute_bps;
  std::optional<double> access_memory_bits;

  bool operator==(const CapacityOverrides&) const = default;
};

std::vector<std::string> builtin_topology_names();

/// Builds one of the reference topologies (dumbbell, triangle, pyramid, garr)
/// with the default capacities, then applies overrides.
Topology build_builtin(std::string_view name, const CapacityOverrides& overrides = {});

Topology load_topology(std::string_view document);
Topology load_topology_file(const std::string& path);
std::string dump_topology(const Topology& topology);

}  // namespace nsorch
