#include "nsorch/strategies.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nsorch {

namespace {

constexpr double kFeasibilitySlack = 1e-9;

double node_capacity(const Node& n, Resource r) {
  if (r == Resource::compute) return n.compute_bps;
  if (r == Resource::memory) return n.memory_bits;
  throw StrategyError("nodes only hold compute and memory");
}

void check_shape(const FlowLayout& layout, std::span<const FlowDemands> demands) {
  if (demands.size() != layout.size()) throw StrategyError("demands do not cover every flow");
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const Route& r = layout.flow(f).route;
    const auto& d = demands[f];
    if (d.link_rate.size() != r.links.size() || d.compute.size() != r.nodes.size() ||
        d.memory.size() != r.nodes.size()) {
      throw StrategyError("demand shape does not match the route of flow " + std::to_string(f));
    }
  }
}

void check_value(double v) {
  if (!(v >= 0) || !std::isfinite(v)) throw StrategyError("demands must be non-negative and finite");
}

}  // namespace

void check_demands(const FlowLayout& layout, std::span<const FlowDemands> demands) {
  check_shape(layout, demands);
  for (const auto& d : demands) {
    for (double v : d.link_rate) check_value(v);
    for (double v : d.compute) check_value(v);
    for (double v : d.memory) check_value(v);
  }
}

double empirical_link_demand(double throughput, double backlog_prev, double slot_s) {
  return throughput + backlog_prev / slot_s;
}

double empirical_node_demand(const Topology& topology, const Route& route, std::size_t position,
                             Resource resource, double requirement) {
  if (position >= route.nodes.size()) throw StrategyError("node is not on the flow's route");
  double total = 0.0;
  for (std::size_t n : route.nodes) total += node_capacity(topology.node(n), resource);
  if (!(total > 0)) throw StrategyError("route has zero total capacity");
  return node_capacity(topology.node(route.nodes[position]), resource) / total * requirement;
}

std::vector<FlowDemands> EmpiricalStrategy::decide(const SlotContext& ctx) {
  const auto& layout = *ctx.layout;
  std::vector<FlowDemands> out(layout.size());
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const Route& r = layout.flow(f).route;
    const DemandVector& req = ctx.demands[f];
    const auto& prev = ctx.previous->flows[f];
    auto& d = out[f];
    for (std::size_t k = 0; k < r.links.size(); ++k) {
      d.link_rate.push_back(empirical_link_demand(req.throughput, prev.links[k].backlog, ctx.slot_s));
    }
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      d.compute.push_back(empirical_node_demand(*ctx.topology, r, k, Resource::compute, req.compute));
      d.memory.push_back(empirical_node_demand(*ctx.topology, r, k, Resource::memory, req.memory));
    }
  }
  return out;
}

std::string_view to_string(AllocationKind kind) {
  switch (kind) {
    case AllocationKind::rate: return "rate";
    case AllocationKind::compute: return "compute";
    case AllocationKind::memory: return "memory";
  }
  return "?";
}

AllocationKind allocation_kind_from_string(std::string_view text) {
  if (text == "rate") return AllocationKind::rate;
  if (text == "compute") return AllocationKind::compute;
  if (text == "memory") return AllocationKind::memory;
  throw StrategyError("unknown allocation kind '" + std::string(text) + "'");
}

void project_feasible(const Topology& topology, const FlowLayout& layout, std::vector<FlowDemands>& amounts) {
  check_shape(layout, amounts);
  std::vector<double> scratch;
  for (std::size_t l = 0; l < layout.n_links(); ++l) {
    const auto& crossing = layout.link_crossings(l);
    if (crossing.empty()) continue;
    scratch.clear();
    for (const auto& c : crossing) scratch.push_back(amounts[c.flow].link_rate[c.position]);
    const auto scaled = scale_link_demands(scratch, topology.link(l).rate_bps);
    for (std::size_t i = 0; i < crossing.size(); ++i) {
      amounts[crossing[i].flow].link_rate[crossing[i].position] = scaled[i];
    }
  }
  for (std::size_t n = 0; n < layout.n_nodes(); ++n) {
    const auto& crossing = layout.node_crossings(n);
    if (crossing.empty()) continue;
    for (Resource res : {Resource::compute, Resource::memory}) {
      auto field = [&](FlowDemands& d) -> std::vector<double>& {
        return res == Resource::compute ? d.compute : d.memory;
      };
      scratch.clear();
      for (const auto& c : crossing) scratch.push_back(field(amounts[c.flow])[c.position]);
      const auto scaled = scale_node_demands(scratch, node_capacity(topology.node(n), res));
      for (std::size_t i = 0; i < crossing.size(); ++i) {
        field(amounts[crossing[i].flow])[crossing[i].position] = scaled[i];
      }
    }
  }
}

StaticAllocation::StaticAllocation(const Topology& topology, const FlowLayout& layout,
                                   std::vector<FlowDemands> amounts)
    : amounts_(std::move(amounts)) {
  check_demands(layout, amounts_);
  auto check_sum = [](double sum, double cap, const std::string& what) {
    if (sum > cap * (1.0 + kFeasibilitySlack)) {
      throw StrategyError("static allocation exceeds the capacity of " + what);
    }
  };
  for (std::size_t l = 0; l < layout.n_links(); ++l) {
    double sum = 0.0;
    for (const auto& c : layout.link_crossings(l)) sum += amounts_[c.flow].link_rate[c.position];
    check_sum(sum, topology.link(l).rate_bps, "link '" + topology.link(l).id + "'");
  }
  for (std::size_t n = 0; n < layout.n_nodes(); ++n) {
    double c_sum = 0.0;
    double m_sum = 0.0;
    for (const auto& c : layout.node_crossings(n)) {
      c_sum += amounts_[c.flow].compute[c.position];
      m_sum += amounts_[c.flow].memory[c.position];
    }
    check_sum(c_sum, topology.node(n).compute_bps, "node '" + topology.node(n).id + "'");
    check_sum(m_sum, topology.node(n).memory_bits, "node '" + topology.node(n).id + "'");
  }
}

double StaticAllocation::amount(const FlowLayout& layout, std::size_t element, std::size_t flow,
                                AllocationKind kind) const {
  if (flow >= amounts_.size() || flow >= layout.size()) throw StrategyError("flow not in allocation table");
  const Route& r = layout.flow(flow).route;
  const auto& path = kind == AllocationKind::rate ? r.links : r.nodes;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] != element) continue;
    switch (kind) {
      case AllocationKind::rate: return amounts_[flow].link_rate[k];
      case AllocationKind::compute: return amounts_[flow].compute[k];
      case AllocationKind::memory: return amounts_[flow].memory[k];
    }
  }
  throw StrategyError("element is not on the route of flow " + std::to_string(flow));
}

StaticPlanEntry make_plan_entry(const Topology& topology, const FlowLayout& layout, std::size_t episode,
                                const StaticAllocation& allocation) {
  StaticPlanEntry e;
  e.episode = episode;
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const auto& path = layout.flow(f);
    StaticPlanFlow pf;
    pf.cls = path.cls;
    pf.src = topology.node(path.route.nodes.front()).id;
    pf.dst = topology.node(path.route.nodes.back()).id;
    for (std::size_t l : path.route.links) pf.link_ids.push_back(topology.link(l).id);
    for (std::size_t n : path.route.nodes) pf.node_ids.push_back(topology.node(n).id);
    pf.amounts = allocation.amounts().at(f);
    e.flows.push_back(std::move(pf));
  }
  return e;
}

StaticAllocation allocation_from_plan(const Topology& topology, const FlowLayout& layout,
                                      const StaticPlanEntry& entry) {
  if (entry.flows.size() != layout.size()) {
    throw StrategyError("static plan for episode " + std::to_string(entry.episode) +
                        " has a different flow count");
  }
  std::vector<FlowDemands> amounts;
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const auto& path = layout.flow(f);
    const auto& pf = entry.flows[f];
    bool same = pf.cls == path.cls && pf.link_ids.size() == path.route.links.size() &&
                pf.node_ids.size() == path.route.nodes.size();
    for (std::size_t k = 0; same && k < pf.link_ids.size(); ++k) {
      same = pf.link_ids[k] == topology.link(path.route.links[k]).id;
    }
    for (std::size_t k = 0; same && k < pf.node_ids.size(); ++k) {
      same = pf.node_ids[k] == topology.node(path.route.nodes[k]).id;
    }
    if (!same) {
      throw StrategyError("static plan for episode " + std::to_string(entry.episode) +
                          " does not match flow " + std::to_string(f));
    }
    amounts.push_back(pf.amounts);
  }
  return StaticAllocation(topology, layout, std::move(amounts));
}

std::string StaticPlan::dump() const {
  nlohmann::ordered_json doc;
  doc["format"] = "nsorch-static-plan";
  doc["version"] = 1;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json je;
    je["episode"] = e.episode;
    je["flows"] = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < e.flows.size(); ++f) {
      const auto& pf = e.flows[f];
      nlohmann::ordered_json jf;
      jf["flow"] = f;
      jf["class"] = std::string(to_string(pf.cls));
      jf["src"] = pf.src;
      jf["dst"] = pf.dst;
      jf["links"] = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < pf.link_ids.size(); ++k) {
        jf["links"].push_back({{"element", pf.link_ids[k]}, {"rate_bps", pf.amounts.link_rate.at(k)}});
      }
      jf["nodes"] = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < pf.node_ids.size(); ++k) {
        jf["nodes"].push_back({{"element", pf.node_ids[k]},
                               {"compute_bps", pf.amounts.compute.at(k)},
                               {"memory_bits", pf.amounts.memory.at(k)}});
      }
      je["flows"].push_back(jf);
    }
    doc["entries"].push_back(je);
  }
  return doc.dump(1) + "\n";
}

StaticPlan StaticPlan::parse(std::string_view text) {
  StaticPlan plan;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", std::string()) != "nsorch-static-plan") {
      throw StrategyError("not a static plan document");
    }
    for (const auto& je : doc.at("entries")) {
      StaticPlanEntry e;
      e.episode = je.at("episode").get<std::size_t>();
      for (const auto& jf : je.at("flows")) {
        StaticPlanFlow pf;
        pf.cls = slice_class_from_string(jf.at("class").get<std::string>());
        pf.src = jf.at("src").get<std::string>();
        pf.dst = jf.at("dst").get<std::string>();
        for (const auto& jl : jf.at("links")) {
          pf.link_ids.push_back(jl.at("element").get<std::string>());
          pf.amounts.link_rate.push_back(jl.at("rate_bps").get<double>());
        }
        for (const auto& jn : jf.at("nodes")) {
          pf.node_ids.push_back(jn.at("element").get<std::string>());
          pf.amounts.compute.push_back(jn.at("compute_bps").get<double>());
          pf.amounts.memory.push_back(jn.at("memory_bits").get<double>());
        }
        e.flows.push_back(std::move(pf));
      }
      plan.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw StrategyError(std::string("malformed static plan: ") + ex.what());
  }
  return plan;
}

StaticPlan StaticPlan::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StrategyError("cannot open static plan '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const StaticPlanEntry* StaticPlan::find(std::size_t episode) const {
  for (const auto& e : entries) {
    if (e.episode == episode) return &e;
  }
  return nullptr;
}

}  // namespace nsorch
