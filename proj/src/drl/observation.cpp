#include "nsorch/drl/observation.hpp"

#include <algorithm>
#include <cmath>

#include "nsorch/drl/mlp.hpp"

namespace nsorch::drl {

namespace {

void check_context(const ObservationContext& ctx, std::size_t flow) {
  if (ctx.topology == nullptr || ctx.layout == nullptr || ctx.previous == nullptr) {
    throw DrlError("observation context is missing the topology, layout or previous outcome");
  }
  if (ctx.demands.size() != ctx.layout->size() || ctx.previous->flows.size() != ctx.layout->size()) {
    throw DrlError("observation context does not match the flow layout");
  }
  if (flow >= ctx.layout->size()) throw DrlError("flow index out of range");
}

double normalize(double value, double scale, double clip) {
  const double x = value / scale;
  if (std::isnan(x)) return clip;
  return std::clamp(x, 0.0, clip);
}

double node_scale(const ObservationConfig& cfg, AllocationKind kind) {
  return kind == AllocationKind::memory ? cfg.memory_scale : cfg.rate_scale;
}

}  // namespace

void ObservationConfig::validate() const {
  if (!(rate_scale > 0.0) || !(memory_scale > 0.0) || !(clip > 0.0)) {
    throw DrlError("observation scales must be positive");
  }
  for (std::size_t i : rate_flow_features) {
    if (i >= 8) throw DrlError("rate_flow_features indices must be below 8");
  }
}

std::array<double, 8> raw_flow_features(const ObservationContext& ctx, std::size_t flow) {
  check_context(ctx, flow);
  const DemandVector& r = ctx.demands[flow];
  const AssignedVector& g = ctx.previous->flows[flow].assigned;
  return {r.throughput, r.compute, r.memory, r.delay, g.throughput, g.compute, g.memory, g.delay};
}

std::array<double, 7> raw_link_features(const ObservationContext& ctx, std::size_t flow, std::size_t position) {
  check_context(ctx, flow);
  const Route& route = ctx.layout->flow(flow).route;
  if (position >= route.links.size()) throw DrlError("link position out of range");
  const std::size_t l = route.links[position];
  const LinkFlowState& s = ctx.previous->flows[flow].links.at(position);
  std::array<double, 2> by_class{0.0, 0.0};
  for (const Crossing& c : ctx.layout->link_crossings(l)) {
    by_class[index_of(ctx.layout->flow(c.flow).cls)] += ctx.previous->flows[c.flow].links.at(c.position).demanded;
  }
  return {ctx.topology->link(l).rate_bps, s.total_delay(), s.backlog, s.demanded, s.assigned, by_class[0],
          by_class[1]};
}

std::array<double, 5> raw_node_features(const ObservationContext& ctx, std::size_t flow, std::size_t position,
                                        AllocationKind kind) {
  check_context(ctx, flow);
  if (kind == AllocationKind::rate) throw DrlError("node features need compute or memory");
  const Route& route = ctx.layout->flow(flow).route;
  if (position >= route.nodes.size()) throw DrlError("node position out of range");
  const std::size_t n = route.nodes[position];
  const bool mem = kind == AllocationKind::memory;
  auto demanded = [&](const NodeFlowState& s) { return mem ? s.demanded_memory : s.demanded_compute; };
  const NodeFlowState& s = ctx.previous->flows[flow].nodes.at(position);
  std::array<double, 2> by_class{0.0, 0.0};
  for (const Crossing& c : ctx.layout->node_crossings(n)) {
    by_class[index_of(ctx.layout->flow(c.flow).cls)] += demanded(ctx.previous->flows[c.flow].nodes.at(c.position));
  }
  const Node& node = ctx.topology->node(n);
  return {mem ? node.memory_bits : node.compute_bps, demanded(s), mem ? s.assigned_memory : s.assigned_compute,
          by_class[0], by_class[1]};
}

namespace {

std::array<double, 8> normalized_flow_part(const ObservationContext& ctx, const ObservationConfig& cfg,
                                           std::size_t flow) {
  const auto raw = raw_flow_features(ctx, flow);
  const double bound = raw[3];
  return {normalize(raw[0], cfg.rate_scale, cfg.clip),   normalize(raw[1], cfg.rate_scale, cfg.clip),
          normalize(raw[2], cfg.memory_scale, cfg.clip), normalize(raw[3], bound, cfg.clip),
          normalize(raw[4], cfg.rate_scale, cfg.clip),   normalize(raw[5], cfg.rate_scale, cfg.clip),
          normalize(raw[6], cfg.memory_scale, cfg.clip), normalize(raw[7], bound, cfg.clip)};
}

}  // namespace

std::vector<double> link_observation(const ObservationContext& ctx, const ObservationConfig& cfg,
                                     std::size_t flow, std::size_t position) {
  const auto fp = normalized_flow_part(ctx, cfg, flow);
  const auto raw = raw_link_features(ctx, flow, position);
  const double bound = ctx.demands[flow].delay;
  std::vector<double> obs;
  obs.reserve(cfg.rate_input_size());
  for (std::size_t i : cfg.rate_flow_features) obs.push_back(fp.at(i));
  obs.push_back(normalize(raw[0], cfg.rate_scale, cfg.clip));
  obs.push_back(normalize(raw[1], bound, cfg.clip));
  obs.push_back(normalize(raw[2], cfg.rate_scale * ctx.slot_s, cfg.clip));
  for (std::size_t i = 3; i < 7; ++i) obs.push_back(normalize(raw[i], cfg.rate_scale, cfg.clip));
  return obs;
}

std::vector<double> node_observation(const ObservationContext& ctx, const ObservationConfig& cfg,
                                     std::size_t flow, std::size_t position, AllocationKind kind) {
  const auto fp = normalized_flow_part(ctx, cfg, flow);
  const auto raw = raw_node_features(ctx, flow, position, kind);
  const std::size_t own = kind == AllocationKind::memory ? 2 : 1;
  const double scale = node_scale(cfg, kind);
  std::vector<double> obs{fp[own], fp[own + 4]};
  for (double v : raw) obs.push_back(normalize(v, scale, cfg.clip));
  return obs;
}

}  // namespace nsorch::drl
