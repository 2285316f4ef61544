#include "nsorch/drl/drl_strategy.hpp"

#include "nsorch/drl/observation.hpp"
#include "nsorch/drl/reward.hpp"
#include "nsorch/traffic.hpp"

namespace nsorch::drl {

void EpisodeBatch::merge(EpisodeBatch&& other) {
  for (auto& [key, list] : other.transitions) {
    auto& dst = transitions[key];
    dst.insert(dst.end(), std::make_move_iterator(list.begin()), std::make_move_iterator(list.end()));
  }
  other.transitions.clear();
}

DrlStrategy::DrlStrategy(std::shared_ptr<const AgentBundle> bundle, RlConfig rl, bool sample_actions, bool collect)
    : bundle_(std::move(bundle)), rl_(rl), sample_(sample_actions), collect_(collect) {
  if (!bundle_) throw DrlError("DRL strategy needs an agent bundle");
  rl_.validate();
}

std::unique_ptr<AllocationStrategy> DrlStrategy::clone() const {
  return std::make_unique<DrlStrategy>(bundle_, rl_, sample_, collect_);
}

void DrlStrategy::build_controllers(const Topology& topology, const FlowLayout& layout) {
  controllers_.clear();
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const FlowPath& path = layout.flow(f);
    for (std::size_t k = 0; k < path.route.links.size(); ++k) {
      const std::size_t l = path.route.links[k];
      controllers_.push_back(
          {f, AllocationKind::rate, k, l, &bundle_->resolve(topology.link(l).id, path.cls, AllocationKind::rate), {}});
    }
    for (AllocationKind kind : {AllocationKind::compute, AllocationKind::memory}) {
      for (std::size_t k = 0; k < path.route.nodes.size(); ++k) {
        const std::size_t n = path.route.nodes[k];
        controllers_.push_back({f, kind, k, n, &bundle_->resolve(topology.node(n).id, path.cls, kind), {}});
      }
    }
  }
}

void DrlStrategy::begin_episode(const EpisodeContext& ctx) {
  rng_.seed(derive_seed(ctx.seed, 0xD41));
  layout_ = ctx.layout;
  build_controllers(*ctx.topology, *ctx.layout);
}

std::vector<FlowDemands> DrlStrategy::decide(const SlotContext& ctx) {
  if (ctx.layout != layout_) throw DrlError("DRL strategy used with a layout it was not prepared for");
  const ObservationContext octx{ctx.topology, ctx.layout, ctx.demands, ctx.previous, ctx.slot_s};
  const ObservationConfig& ocfg = bundle_->observation;

  std::vector<FlowDemands> out(ctx.layout->size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    const Route& r = ctx.layout->flow(f).route;
    out[f].link_rate.assign(r.links.size(), 0.0);
    out[f].compute.assign(r.nodes.size(), 0.0);
    out[f].memory.assign(r.nodes.size(), 0.0);
  }

  for (Controller& c : controllers_) {
    std::vector<double> obs;
    double capacity = 0.0;
    double* slot = nullptr;
    if (c.kind == AllocationKind::rate) {
      obs = link_observation(octx, ocfg, c.flow, c.position);
      capacity = ctx.topology->link(c.element).rate_bps;
      slot = &out[c.flow].link_rate[c.position];
    } else {
      obs = node_observation(octx, ocfg, c.flow, c.position, c.kind);
      const Node& node = ctx.topology->node(c.element);
      const bool mem = c.kind == AllocationKind::memory;
      capacity = mem ? node.memory_bits : node.compute_bps;
      slot = mem ? &out[c.flow].memory[c.position] : &out[c.flow].compute[c.position];
    }
    const ActResult a = act(bundle_->at(*c.key), obs, capacity, sample_ ? &rng_ : nullptr);
    *slot = a.demand;

    if (collect_) {
      auto& list = batch_.transitions[*c.key];
      if (c.last) list[*c.last].next_observation = obs;
      Transition t;
      t.observation = std::move(obs);
      t.action = a.raw;
      t.demand = a.demand;
      c.last = list.size();
      list.push_back(std::move(t));
    }
  }
  return out;
}

void DrlStrategy::end_slot(const SlotContext& ctx, const SlotOutcome& outcome) {
  if (!collect_) return;
  const RewardWeights w = rl_.reward_weights();
  for (const Controller& c : controllers_) {
    double r = 0.0;
    if (c.kind == AllocationKind::rate) {
      r = reward_link(*ctx.performance, *ctx.layout, ctx.demands, outcome, c.flow, c.element, w);
    } else {
      const Resource res = c.kind == AllocationKind::compute ? Resource::compute : Resource::memory;
      r = reward_node(*ctx.performance, *ctx.layout, ctx.demands, outcome, c.flow, c.element, res, w);
    }
    batch_.transitions[*c.key][*c.last].reward = r;
  }
}

void DrlStrategy::end_episode() {
  if (collect_) {
    for (Controller& c : controllers_) {
      if (!c.last) continue;
      Transition& t = batch_.transitions[*c.key][*c.last];
      t.done = true;
      t.next_observation = t.observation;
    }
  }
  controllers_.clear();
  layout_ = nullptr;
}

EpisodeBatch DrlStrategy::take_batch() {
  EpisodeBatch out = std::move(batch_);
  batch_ = {};
  return out;
}

}  // namespace nsorch::drl
