#include "nsorch/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

namespace nsorch {

namespace {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

/// Collects the first exception thrown inside a parallel loop.
class ExceptionSlot {
 public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

}  // namespace

void EpisodeConfig::validate(const Topology& topology) const {
  if (n_slots < 1) throw OrchestratorError("an episode needs at least one slot");
  if (!(slot_s > 0.0) || !std::isfinite(slot_s)) throw OrchestratorError("slot duration must be positive");
  if (!(embb_fraction >= 0.0 && embb_fraction <= 1.0)) throw OrchestratorError("embb_fraction must lie in [0,1]");
  if (topology.access_nodes().size() < 2) throw OrchestratorError("topology has fewer than two access nodes");
  if (fixed_flows.empty()) {
    if (min_flows < 1 || min_flows > max_flows) throw OrchestratorError("flow count range is empty");
  }
  for (const FlowSpec& f : fixed_flows) {
    for (const auto& id : {f.src, f.dst}) {
      const auto n = topology.find_node(id);
      if (!n || topology.node(*n).kind != NodeKind::access) {
        throw OrchestratorError("fixed flow endpoint '" + id + "' is not an access node");
      }
    }
    if (f.src == f.dst) throw OrchestratorError("fixed flow endpoints must differ");
  }
}

Scenario::Scenario(Topology topology, PerformanceModel performance, EpisodeConfig episode,
                   const TrafficConfig& traffic)
    : topology_(std::move(topology)),
      performance_(std::move(performance)),
      episode_(std::move(episode)),
      models_{MarkovDemandModel::build(SliceClass::embb, traffic.embb, traffic.n_states, traffic.stay_prob),
              MarkovDemandModel::build(SliceClass::urllc, traffic.urllc, traffic.n_states, traffic.stay_prob)} {
  performance_.shape().validate();
  episode_.validate(topology_);
}

std::vector<SpawnedFlow> spawn_flows(const Scenario& scenario, std::mt19937_64& rng) {
  const EpisodeConfig& cfg = scenario.episode();
  const Topology& topo = scenario.topology();
  std::vector<FlowSpec> specs;
  if (!cfg.fixed_flows.empty()) {
    specs = cfg.fixed_flows;
  } else {
    const auto access = topo.access_nodes();
    const std::size_t n = cfg.min_flows + uniform_index(rng, cfg.max_flows - cfg.min_flows + 1);
    for (std::size_t i = 0; i < n; ++i) {
      FlowSpec s;
      s.cls = unit_uniform(rng) < cfg.embb_fraction ? SliceClass::embb : SliceClass::urllc;
      const std::size_t a = uniform_index(rng, access.size());
      std::size_t b = uniform_index(rng, access.size() - 1);
      if (b >= a) ++b;
      s.src = topo.node(access[a]).id;
      s.dst = topo.node(access[b]).id;
      specs.push_back(std::move(s));
    }
  }
  const std::uint64_t chain_base = rng();
  std::vector<SpawnedFlow> out;
  out.reserve(specs.size());
  for (std::size_t f = 0; f < specs.size(); ++f) {
    SpawnedFlow sf;
    sf.path = {specs[f].cls, topo.route(specs[f].src, specs[f].dst)};
    sf.initial_state = uniform_index(rng, scenario.model(specs[f].cls).n_states());
    sf.chain_seed = derive_seed(chain_base, f);
    sf.spec = std::move(specs[f]);
    out.push_back(std::move(sf));
  }
  return out;
}

std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t episode) {
  return derive_seed(master_seed, 0xE915, episode);
}

EvalRow run_episode(const Scenario& scenario, AllocationStrategy& strategy, std::size_t episode,
                    std::uint64_t master_seed) {
  const Topology& topo = scenario.topology();
  const PerformanceModel& perf = scenario.performance();
  const EpisodeConfig& cfg = scenario.episode();
  const std::uint64_t seed = episode_seed(master_seed, episode);

  std::mt19937_64 rng(derive_seed(seed, 0x5A));
  const auto spawned = spawn_flows(scenario, rng);
  std::vector<FlowPath> paths;
  std::vector<FlowDemandProcess> chains;
  std::vector<DemandVector> average;
  for (const auto& s : spawned) {
    paths.push_back(s.path);
    const auto& model = scenario.model(s.spec.cls);
    chains.emplace_back(&model, s.initial_state, s.chain_seed);
    average.push_back(model.average_demand());
  }
  const FlowLayout layout(topo, std::move(paths));
  const std::size_t n = layout.size();

  strategy.begin_episode({&topo, &layout, &perf, average, cfg.slot_s, episode, seed});

  EvalRow row;
  row.episode = episode;
  row.n_flows = n;
  double sum_e = 0.0;
  double sum_u = 0.0;
  bool has_e = false;
  bool has_u = false;
  SlotOutcome previous = initial_outcome(layout, cfg.slot_s);
  std::vector<DemandVector> demands(n);
  std::vector<FlowSample> samples(n);
  for (std::size_t t = 0; t < cfg.n_slots; ++t) {
    for (std::size_t f = 0; f < n; ++f) demands[f] = chains[f].step();
    const SlotContext sctx{&topo, &layout, &perf, demands, &previous, cfg.slot_s, t};

    SlotInput in;
    in.demands = strategy.decide(sctx);
    check_demands(layout, in.demands);
    for (const auto& d : demands) in.source_rates.push_back(d.throughput);
    in.prev_backlogs = backlogs_of(previous);
    SlotOutcome out = step_slot(topo, layout, in, cfg.slot_s, t);

    for (std::size_t f = 0; f < n; ++f) samples[f] = {layout.flow(f).cls, demands[f], out.flows[f].assigned};
    const Utility u = system_utility(perf, samples);
    row.omega += u.overall;
    if (u.embb) {
      has_e = true;
      sum_e += *u.embb;
    }
    if (u.urllc) {
      has_u = true;
      sum_u += *u.urllc;
    }
    row.omega_eta += resource_utility(perf, samples, Resource::throughput).overall;
    row.omega_c += resource_utility(perf, samples, Resource::compute).overall;
    row.omega_m += resource_utility(perf, samples, Resource::memory).overall;
    row.omega_delta += resource_utility(perf, samples, Resource::delay).overall;

    strategy.end_slot(sctx, out);
    previous = std::move(out);
  }
  strategy.end_episode();

  const auto slots = static_cast<double>(cfg.n_slots);
  row.omega /= slots;
  row.omega_eta /= slots;
  row.omega_c /= slots;
  row.omega_m /= slots;
  row.omega_delta /= slots;
  if (has_e) row.omega_e = sum_e / slots;
  if (has_u) row.omega_u = sum_u / slots;
  return row;
}

std::vector<EvalRow> evaluate(const Scenario& scenario, const AllocationStrategy& prototype, std::size_t first,
                              std::size_t count, std::uint64_t master_seed, Execution execution,
                              const EpisodeHook& hook) {
  std::vector<EvalRow> rows(count);
  ExceptionSlot errors;
  auto body = [&](std::size_t i) {
    errors.run([&] {
      auto s = prototype.clone();
      rows[i] = run_episode(scenario, *s, first + i, master_seed);
      if (hook) hook(i, *s);
    });
  };
  const auto n = static_cast<std::ptrdiff_t>(count);
  if (execution == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  }
  errors.rethrow();
  return rows;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw OrchestratorError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::optional<Summary> summarize(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  Summary s;
  s.count = values.size();
  s.median = quantile(values, 0.5);
  s.p25 = quantile(values, 0.25);
  s.p75 = quantile(values, 0.75);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

std::vector<double> metric_values(std::span<const EvalRow> rows, std::string_view metric) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const EvalRow& r : rows) {
    std::optional<double> v;
    if (metric == "omega") v = r.omega;
    else if (metric == "omega_e") v = r.omega_e;
    else if (metric == "omega_u") v = r.omega_u;
    else if (metric == "omega_eta") v = r.omega_eta;
    else if (metric == "omega_c") v = r.omega_c;
    else if (metric == "omega_m") v = r.omega_m;
    else if (metric == "omega_delta") v = r.omega_delta;
    else throw OrchestratorError("unknown metric '" + std::string(metric) + "'");
    if (v) out.push_back(*v);
  }
  return out;
}

std::map<std::string, std::optional<Summary>> summarize_rows(std::span<const EvalRow> rows) {
  std::map<std::string, std::optional<Summary>> out;
  for (const auto& m : kEvalMetrics) out[m] = summarize(metric_values(rows, m));
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

std::size_t reward_slot(const drl::AgentKey& key) {
  return 2 * static_cast<std::size_t>(key.kind) + index_of(key.cls);
}

CurveRow curve_row(const EvalRow& row, const drl::EpisodeBatch& batch) {
  CurveRow c;
  c.episode = row.episode;
  c.omega = row.omega;
  c.omega_e = row.omega_e;
  c.omega_u = row.omega_u;
  std::array<double, 6> sum{};
  std::array<std::size_t, 6> cnt{};
  for (const auto& [key, list] : batch.transitions) {
    const std::size_t k = reward_slot(key);
    for (const auto& t : list) sum[k] += t.reward;
    cnt[k] += list.size();
  }
  for (std::size_t k = 0; k < 6; ++k) {
    if (cnt[k] > 0) c.mean_reward[k] = sum[k] / static_cast<double>(cnt[k]);
  }
  return c;
}

}  // namespace

TrainStats train(const Scenario& scenario, drl::AgentBundle& bundle, const TrainConfig& config,
                 std::vector<CurveRow>& curve, Execution execution, const CheckpointHook& on_checkpoint) {
  config.rl.validate();
  if (config.workers < 1) throw OrchestratorError("training needs at least one worker");
  const std::shared_ptr<const drl::AgentBundle> view(&bundle, [](const drl::AgentBundle*) {});
  const drl::DrlStrategy prototype(view, config.rl, /*sample_actions=*/true, /*collect=*/true);

  TrainStats stats;
  std::size_t done = 0;
  while (done < config.episodes) {
    const std::size_t k = std::min(config.workers, config.episodes - done);
    std::vector<EvalRow> rows(k);
    std::vector<drl::EpisodeBatch> batches(k);
    ExceptionSlot errors;
    auto rollout = [&](std::size_t i) {
      errors.run([&] {
        auto s = prototype.clone();
        rows[i] = run_episode(scenario, *s, config.first_episode + done + i, config.seed);
        batches[i] = static_cast<drl::DrlStrategy&>(*s).take_batch();
      });
    };
    const auto nk = static_cast<std::ptrdiff_t>(k);
    if (execution == Execution::serial || k == 1) {
      for (std::ptrdiff_t i = 0; i < nk; ++i) rollout(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < nk; ++i) rollout(static_cast<std::size_t>(i));
    }
    errors.rethrow();

    drl::EpisodeBatch merged;
    for (std::size_t i = 0; i < k; ++i) {
      curve.push_back(curve_row(rows[i], batches[i]));
      merged.merge(std::move(batches[i]));
    }

    std::vector<std::pair<drl::Agent*, const std::vector<drl::Transition>*>> jobs;
    for (const auto& [key, list] : merged.transitions) {
      if (!list.empty()) jobs.emplace_back(&bundle.at(key), &list);
    }
    std::vector<drl::LossReport> reports(jobs.size());
    auto update = [&](std::size_t j) {
      errors.run([&] { reports[j] = drl::a2c_update(*jobs[j].first, *jobs[j].second, config.rl); });
    };
    const auto nj = static_cast<std::ptrdiff_t>(jobs.size());
    if (execution == Execution::serial) {
      for (std::ptrdiff_t j = 0; j < nj; ++j) update(static_cast<std::size_t>(j));
    } else {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t j = 0; j < nj; ++j) update(static_cast<std::size_t>(j));
    }
    errors.rethrow();
    for (const auto& r : reports) {
      ++stats.updates;
      if (r.actor_skipped || r.critic_skipped) ++stats.skipped_updates;
    }

    const std::size_t before = done;
    done += k;
    stats.episodes = done;
    if (on_checkpoint && config.checkpoint_every > 0 &&
        done / config.checkpoint_every > before / config.checkpoint_every) {
      on_checkpoint(done, bundle);
    }
  }
  return stats;
}

drl::AgentBundle specialize(const Topology& topology, const drl::AgentBundle& source) {
  drl::AgentBundle out;
  out.observation = source.observation;
  auto copy = [&](const std::string& element, SliceClass cls, AllocationKind kind) {
    const drl::AgentKey* key = nullptr;
    try {
      key = &source.resolve(element, cls, kind);
    } catch (const drl::DrlError&) {
      throw OrchestratorError("checkpoint has no " + std::string(to_string(cls)) + " " +
                              std::string(to_string(kind)) + " agent usable on element '" + element + "'");
    }
    out.agents.emplace(drl::AgentKey{element, cls, kind}, source.at(*key));
  };
  for (SliceClass cls : kSliceClasses) {
    for (const Link& l : topology.links()) copy(l.id, cls, AllocationKind::rate);
    for (const Node& n : topology.nodes()) {
      copy(n.id, cls, AllocationKind::compute);
      copy(n.id, cls, AllocationKind::memory);
    }
  }
  return out;
}

drl::AgentBundle transfer(const Scenario& scenario, const drl::AgentBundle& source, const TrainConfig& config,
                          std::vector<CurveRow>& curve, Execution execution, const CheckpointHook& on_checkpoint) {
  drl::AgentBundle out = specialize(scenario.topology(), source);
  if (config.episodes > 0) train(scenario, out, config, curve, execution, on_checkpoint);
  return out;
}

}  // namespace nsorch
