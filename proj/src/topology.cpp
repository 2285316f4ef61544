#include "nsorch/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace nsorch {

namespace {

constexpr double kGbps = 1e9;
constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

struct BuiltinDefaults {
  double link_rate = 50 * kGbps;
  double core_compute = 60 * kGbps;
  double core_memory = 60 * kGbps;
  double access_compute = 20 * kGbps;
  double access_memory = 20 * kGbps;
  double propagation = 0.1e-3;
  double routing = 0.001e-3;
};

class Builder {
 public:
  Builder(BuiltinDefaults defaults, const CapacityOverrides& o) : d_(defaults) {
    if (o.link_rate_bps) d_.link_rate = *o.link_rate_bps;
    if (o.link_propagation_delay_s) d_.propagation = *o.link_propagation_delay_s;
    if (o.node_routing_delay_s) d_.routing = *o.node_routing_delay_s;
    if (o.core_compute_bps) d_.core_compute = *o.core_compute_bps;
    if (o.core_memory_bits) d_.core_memory = *o.core_memory_bits;
    if (o.access_compute_bps) d_.access_compute = *o.access_compute_bps;
    if (o.access_memory_bits) d_.access_memory = *o.access_memory_bits;
  }

  void core(const std::string& id) {
    nodes_.push_back({id, NodeKind::core, d_.core_compute, d_.core_memory, d_.routing});
  }
  void access(const std::string& id) {
    nodes_.push_back({id, NodeKind::access, d_.access_compute, d_.access_memory, d_.routing});
  }
  void link(const std::string& a, const std::string& b) {
    links_.push_back({a + "-" + b, a, b, d_.link_rate, d_.propagation});
  }

  Topology build(std::string name) && {
    return Topology(std::move(name), std::move(nodes_), std::move(links_));
  }

 private:
  BuiltinDefaults d_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
};

std::string two_digit(const char* prefix, int i) {
  std::ostringstream out;
  out << prefix << (i < 10 ? "0" : "") << i;
  return out.str();
}

// Two access nodes on each side of a single core-to-core bottleneck.
Topology make_dumbbell(const CapacityOverrides& o) {
  Builder b({}, o);
  for (auto id : {"a1", "a2", "a3", "a4"}) b.access(id);
  for (auto id : {"c1", "c2"}) b.core(id);
  b.link("a1", "c1");
  b.link("a2", "c1");
  b.link("c1", "c2");
  b.link("c2", "a3");
  b.link("c2", "a4");
  return std::move(b).build("dumbbell");
}

// Three fully meshed core nodes, two access nodes hanging off each.
Topology make_triangle(const CapacityOverrides& o) {
  Builder b({}, o);
  for (auto id : {"a1", "a2", "a3", "a4", "a5", "a6"}) b.access(id);
  for (auto id : {"c1", "c2", "c3"}) b.core(id);
  b.link("c1", "c2");
  b.link("c2", "c3");
  b.link("c1", "c3");
  b.link("a1", "c1");
  b.link("a2", "c1");
  b.link("a3", "c2");
  b.link("a4", "c2");
  b.link("a5", "c3");
  b.link("a6", "c3");
  return std::move(b).build("triangle");
}

// Apex core above a chain of three base cores; access nodes on the base.
Topology make_pyramid(const CapacityOverrides& o) {
  Builder b({}, o);
  for (auto id : {"a1", "a2", "a3", "a4", "a5", "a6"}) b.access(id);
  for (auto id : {"c1", "c2", "c3", "c4"}) b.core(id);
  b.link("c1", "c2");
  b.link("c1", "c3");
  b.link("c1", "c4");
  b.link("c2", "c3");
  b.link("c3", "c4");
  b.link("a1", "c2");
  b.link("a2", "c2");
  b.link("a3", "c3");
  b.link("a4", "c3");
  b.link("a5", "c4");
  b.link("a6", "c4");
  return std::move(b).build("pyramid");
}

// Representative 19-core / 10-edge / 40-link research backbone: a core ring
// with eleven chords, edges attached to every other core.
Topology make_garr(const CapacityOverrides& o) {
  BuiltinDefaults d;
  d.core_compute = 30 * kGbps;
  d.core_memory = 30 * kGbps;
  d.access_compute = 10 * kGbps;
  d.access_memory = 10 * kGbps;
  Builder b(d, o);
  for (int i = 1; i <= 10; ++i) b.access(two_digit("edge", i));
  for (int i = 1; i <= 19; ++i) b.core(two_digit("core", i));
  for (int i = 1; i <= 19; ++i) b.link(two_digit("core", i), two_digit("core", i % 19 + 1));
  const int chords[][2] = {{1, 6}, {2, 10}, {3, 14}, {4, 8}, {5, 16}, {7, 12},
                           {9, 18}, {11, 15}, {13, 19}, {3, 17}, {6, 11}};
  for (const auto& c : chords) b.link(two_digit("core", c[0]), two_digit("core", c[1]));
  for (int i = 1; i <= 10; ++i) b.link(two_digit("edge", i), two_digit("core", 2 * i - 1));
  return std::move(b).build("garr");
}

double require_integer_quantity(const nlohmann::json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw TopologyError(std::string("field '") + key + "' must be an integer in base units");
  }
  return static_cast<double>(v.get<std::int64_t>());
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kind == NodeKind::access ? "access" : "core"; }

NodeKind node_kind_from_string(std::string_view text) {
  if (text == "access") return NodeKind::access;
  if (text == "core") return NodeKind::core;
  throw TopologyError("unknown node kind '" + std::string(text) + "'");
}

Topology::Topology(std::string name, std::vector<Node> nodes, std::vector<Link> links)
    : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
  if (nodes_.empty()) throw TopologyError("topology has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.id.empty()) throw TopologyError("node with empty id");
    if (!(n.compute_bps >= 0) || !(n.memory_bits >= 0) || !std::isfinite(n.compute_bps) ||
        !std::isfinite(n.memory_bits)) {
      throw TopologyError("node '" + n.id + "' has a negative or non-finite capacity");
    }
    if (!(n.routing_delay_s >= 0) || !std::isfinite(n.routing_delay_s)) {
      throw TopologyError("node '" + n.id + "' has a negative routing delay");
    }
    if (!node_by_id_.emplace(n.id, i).second) throw TopologyError("duplicate node id '" + n.id + "'");
  }
  adjacency_.resize(nodes_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    auto a = node_by_id_.find(l.a);
    auto b = node_by_id_.find(l.b);
    if (a == node_by_id_.end() || b == node_by_id_.end()) {
      throw TopologyError("link '" + l.id + "' references a missing node");
    }
    if (a->second == b->second) throw TopologyError("link '" + l.id + "' has identical endpoints");
    if (!(l.rate_bps > 0) || !std::isfinite(l.rate_bps)) {
      throw TopologyError("link '" + l.id + "' must have a positive rate capacity");
    }
    if (!(l.propagation_delay_s >= 0) || !std::isfinite(l.propagation_delay_s)) {
      throw TopologyError("link '" + l.id + "' has a negative propagation delay");
    }
    if (!link_by_id_.emplace(l.id, i).second) throw TopologyError("duplicate link id '" + l.id + "'");
    endpoint_a_.push_back(a->second);
    endpoint_b_.push_back(b->second);
    adjacency_[a->second].push_back(i);
    adjacency_[b->second].push_back(i);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [&](std::size_t x, std::size_t y) { return links_[x].id < links_[y].id; });
  }

  const auto access = access_nodes();
  if (access.size() >= 2) {
    const auto dist = hop_distances_to(access.front());
    for (std::size_t a : access) {
      if (dist[a] == kUnreachable) {
        throw TopologyError("access node '" + nodes_[a].id + "' is not connected to '" +
                            nodes_[access.front()].id + "'");
      }
    }
  }
}

std::size_t Topology::node_index(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) throw TopologyError("unknown node '" + std::string(id) + "'");
  return it->second;
}

std::size_t Topology::link_index(std::string_view id) const {
  auto it = link_by_id_.find(std::string(id));
  if (it == link_by_id_.end()) throw TopologyError("unknown link '" + std::string(id) + "'");
  return it->second;
}

std::optional<std::size_t> Topology::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t Topology::other_end(std::size_t link, std::size_t node) const {
  if (endpoint_a_.at(link) == node) return endpoint_b_[link];
  if (endpoint_b_.at(link) == node) return endpoint_a_[link];
  throw TopologyError("node is not an endpoint of link '" + links_.at(link).id + "'");
}

std::vector<std::size_t> Topology::access_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::access) out.push_back(i);
  }
  std::sort(out.begin(), out.end(),
            [&](std::size_t x, std::size_t y) { return nodes_[x].id < nodes_[y].id; });
  return out;
}

std::vector<std::size_t> Topology::hop_distances_to(std::size_t dst) const {
  std::vector<std::size_t> dist(nodes_.size(), kUnreachable);
  std::deque<std::size_t> queue{dst};
  dist[dst] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    // Only the destination itself and core nodes may relay traffic.
    if (u != dst && nodes_[u].kind != NodeKind::core) continue;
    for (std::size_t l : adjacency_[u]) {
      const std::size_t w = other_end(l, u);
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

Route Topology::route(std::string_view src, std::string_view dst) const {
  return route(node_index(src), node_index(dst));
}

Route Topology::route(std::size_t src, std::size_t dst) const {
  if (src >= nodes_.size() || dst >= nodes_.size()) throw TopologyError("route endpoint out of range");
  if (src == dst) throw TopologyError("a route needs two distinct endpoints");
  if (nodes_[src].kind != NodeKind::access || nodes_[dst].kind != NodeKind::access) {
    throw TopologyError("route endpoints must be access nodes");
  }
  const auto dist = hop_distances_to(dst);
  if (dist[src] == kUnreachable) {
    throw TopologyError("no path between '" + nodes_[src].id + "' and '" + nodes_[dst].id + "'");
  }

  Route r;
  r.nodes.push_back(src);
  std::size_t here = src;
  while (here != dst) {
    std::optional<std::size_t> best_node;
    std::size_t best_link = 0;
    for (std::size_t l : adjacency_[here]) {
      const std::size_t next = other_end(l, here);
      if (dist[next] + 1 != dist[here]) continue;
      if (next != dst && nodes_[next].kind != NodeKind::core) continue;
      // Adjacency is sorted by link id, so the first hit per node is the
      // smallest parallel link.
      if (!best_node || nodes_[next].id < nodes_[*best_node].id) {
        best_node = next;
        best_link = l;
      }
    }
    r.links.push_back(best_link);
    r.nodes.push_back(*best_node);
    here = *best_node;
  }
  return r;
}

std::vector<std::string> builtin_topology_names() { return {"dumbbell", "triangle", "pyramid", "garr"}; }

Topology build_builtin(std::string_view name, const CapacityOverrides& overrides) {
  if (name == "dumbbell") return make_dumbbell(overrides);
  if (name == "triangle") return make_triangle(overrides);
  if (name == "pyramid") return make_pyramid(overrides);
  if (name == "garr") return make_garr(overrides);
  throw TopologyError("unknown topology name '" + std::string(name) + "'");
}

Topology load_topology(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw TopologyError(std::string("topology parse error: ") + e.what());
  }
  try {
    std::vector<Node> nodes;
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<std::string>(),
                       node_kind_from_string(n.at("kind").get<std::string>()),
                       require_integer_quantity(n, "compute_bps"),
                       require_integer_quantity(n, "memory_bits"),
                       n.at("routing_delay_s").get<double>()});
    }
    std::vector<Link> links;
    for (const auto& l : doc.at("links")) {
      links.push_back({l.at("id").get<std::string>(), l.at("a").get<std::string>(),
                       l.at("b").get<std::string>(), require_integer_quantity(l, "rate_bps"),
                       l.at("propagation_delay_s").get<double>()});
    }
    return Topology(doc.value("name", std::string("custom")), std::move(nodes), std::move(links));
  } catch (const nlohmann::json::exception& e) {
    throw TopologyError(std::string("malformed topology document: ") + e.what());
  }
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_topology(buffer.str());
}

std::string dump_topology(const Topology& topology) {
  nlohmann::ordered_json doc;
  doc["name"] = topology.name();
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : topology.nodes()) {
    nlohmann::ordered_json j;
    j["id"] = n.id;
    j["kind"] = std::string(to_string(n.kind));
    j["compute_bps"] = static_cast<std::int64_t>(std::llround(n.compute_bps));
    j["memory_bits"] = static_cast<std::int64_t>(std::llround(n.memory_bits));
    j["routing_delay_s"] = n.routing_delay_s;
    doc["nodes"].push_back(j);
  }
  doc["links"] = nlohmann::ordered_json::array();
  for (const auto& l : topology.links()) {
    nlohmann::ordered_json j;
    j["id"] = l.id;
    j["a"] = l.a;
    j["b"] = l.b;
    j["rate_bps"] = static_cast<std::int64_t>(std::llround(l.rate_bps));
    j["propagation_delay_s"] = l.propagation_delay_s;
    doc["links"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

}  // namespace nsorch
