#include "nsorch/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nsorch {

using nlohmann::ordered_json;

namespace {

// Overlay helpers: each reads a key only when present and rejects keys the
// block does not define.

void check_keys(const ordered_json& j, std::string_view block, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError("'" + std::string(block) + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in '" + std::string(block) + "'");
  }
}

template <typename T>
void read(const ordered_json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

void read_opt(const ordered_json& j, const char* key, std::optional<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    dst.reset();
  } else {
    double v = 0.0;
    read(j, key, v);
    dst = v;
  }
}

ordered_json range_json(const ResourceRange& r) { return ordered_json::array({r.min, r.max}); }

void read_range(const ordered_json& j, const char* key, ResourceRange& r) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("'") + key + "' must be [min, max]");
  r = {a[0].get<double>(), a[1].get<double>()};
}

ordered_json profile_json(const ClassTrafficProfile& p) {
  return {{"throughput", range_json(p.throughput)},
          {"compute", range_json(p.compute)},
          {"memory", range_json(p.memory)},
          {"delay_bound_s", p.delay_bound_s}};
}

void read_profile(const ordered_json& j, ClassTrafficProfile& p, std::string_view name) {
  check_keys(j, name, {"throughput", "compute", "memory", "delay_bound_s"});
  read_range(j, "throughput", p.throughput);
  read_range(j, "compute", p.compute);
  read_range(j, "memory", p.memory);
  read(j, "delay_bound_s", p.delay_bound_s);
}

std::string_view orientation_name(drl::RewardOrientation o) {
  return o == drl::RewardOrientation::literal ? "literal" : "fulfillment";
}

drl::RewardOrientation orientation_from(const std::string& s) {
  if (s == "fulfillment") return drl::RewardOrientation::fulfillment;
  if (s == "literal") return drl::RewardOrientation::literal;
  throw ConfigError("reward_orientation must be 'fulfillment' or 'literal', got '" + s + "'");
}

ordered_json overrides_json(const CapacityOverrides& o) {
  ordered_json j = ordered_json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("link_rate_bps", o.link_rate_bps);
  put("link_propagation_delay_s", o.link_propagation_delay_s);
  put("node_routing_delay_s", o.node_routing_delay_s);
  put("core_compute_bps", o.core_compute_bps);
  put("core_memory_bits", o.core_memory_bits);
  put("access_compute_bps", o.access_compute_bps);
  put("access_memory_bits", o.access_memory_bits);
  return j;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["topology"] = {{"builtin", c.topology.builtin},
                   {"file", c.topology.file},
                   {"overrides", overrides_json(c.topology.overrides)}};
  j["slices"] = {{"alpha", c.embb_shape.alpha}, {"beta", c.embb_shape.beta}};
  j["traffic"] = {{"embb", profile_json(c.traffic.embb)},
                  {"urllc", profile_json(c.traffic.urllc)},
                  {"n_states", c.traffic.n_states},
                  {"stay_prob", c.traffic.stay_prob},
                  {"pyramid_plus", c.pyramid_plus}};
  ordered_json flows = ordered_json::array();
  for (const auto& f : c.episode.fixed_flows) {
    flows.push_back({{"class", std::string(to_string(f.cls))}, {"src", f.src}, {"dst", f.dst}});
  }
  j["episode"] = {{"min_flows", c.episode.min_flows},
                  {"max_flows", c.episode.max_flows},
                  {"embb_fraction", c.episode.embb_fraction},
                  {"fixed_flows", flows},
                  {"n_slots", c.episode.n_slots},
                  {"slot_s", c.episode.slot_s}};
  j["rl"] = {{"discount", c.rl.discount},
             {"entropy", c.rl.entropy},
             {"gamma0", c.rl.gamma0},
             {"gamma1", c.rl.gamma1},
             {"lr_actor", c.rl.lr_actor},
             {"lr_critic", c.rl.lr_critic},
             {"initial_log_std", c.rl.initial_log_std},
             {"squared_advantage", c.rl.squared_advantage},
             {"reward_orientation", orientation_name(c.rl.orientation)}};
  j["observation"] = {{"rate_scale", c.observation.rate_scale},
                      {"memory_scale", c.observation.memory_scale},
                      {"clip", c.observation.clip},
                      {"rate_flow_features", c.observation.rate_flow_features}};
  j["network"] = {{"rate_hidden", c.network.rate_hidden}, {"node_hidden", c.network.node_hidden},
                  {"actor_output_gain", c.network.actor_output_gain}};
  j["ga"] = {{"population", c.ga.population},
             {"generations", c.ga.generations},
             {"crossover_rate", c.ga.crossover_rate},
             {"mutation_rate", c.ga.mutation_rate},
             {"mutation_scale", c.ga.mutation_scale},
             {"elitism", c.ga.elitism},
             {"tournament", c.ga.tournament},
             {"seed", c.ga.seed}};
  j["runs"] = {{"train_episodes", c.runs.train_episodes},
               {"transfer_episodes", c.runs.transfer_episodes},
               {"eval_episodes", c.runs.eval_episodes},
               {"workers", c.runs.workers},
               {"checkpoint_every", c.runs.checkpoint_every},
               {"eval_sample_actions", c.eval_sample_actions}};
  j["strategies"] = c.strategies;
  j["out_dir"] = c.out_dir;
  return j;
}

void overlay(const ordered_json& j, ExperimentConfig& c) {
  check_keys(j, "config", {"preset", "seed", "topology", "slices", "traffic", "episode", "rl", "observation",
                           "network", "ga", "runs", "strategies", "out_dir"});
  read(j, "seed", c.seed);
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    check_keys(t, "topology", {"builtin", "file", "overrides"});
    read(t, "builtin", c.topology.builtin);
    read(t, "file", c.topology.file);
    if (t.contains("overrides")) {
      const auto& o = t["overrides"];
      check_keys(o, "overrides",
                 {"link_rate_bps", "link_propagation_delay_s", "node_routing_delay_s", "core_compute_bps",
                  "core_memory_bits", "access_compute_bps", "access_memory_bits"});
      auto& ov = c.topology.overrides;
      read_opt(o, "link_rate_bps", ov.link_rate_bps);
      read_opt(o, "link_propagation_delay_s", ov.link_propagation_delay_s);
      read_opt(o, "node_routing_delay_s", ov.node_routing_delay_s);
      read_opt(o, "core_compute_bps", ov.core_compute_bps);
      read_opt(o, "core_memory_bits", ov.core_memory_bits);
      read_opt(o, "access_compute_bps", ov.access_compute_bps);
      read_opt(o, "access_memory_bits", ov.access_memory_bits);
    }
  }
  if (j.contains("slices")) {
    const auto& s = j["slices"];
    check_keys(s, "slices", {"alpha", "beta"});
    read(s, "alpha", c.embb_shape.alpha);
    read(s, "beta", c.embb_shape.beta);
  }
  if (j.contains("traffic")) {
    const auto& t = j["traffic"];
    check_keys(t, "traffic", {"embb", "urllc", "n_states", "stay_prob", "pyramid_plus"});
    if (t.contains("embb")) read_profile(t["embb"], c.traffic.embb, "traffic.embb");
    if (t.contains("urllc")) read_profile(t["urllc"], c.traffic.urllc, "traffic.urllc");
    read(t, "n_states", c.traffic.n_states);
    read(t, "stay_prob", c.traffic.stay_prob);
    read(t, "pyramid_plus", c.pyramid_plus);
  }
  if (j.contains("episode")) {
    const auto& e = j["episode"];
    check_keys(e, "episode", {"min_flows", "max_flows", "embb_fraction", "fixed_flows", "n_slots", "slot_s"});
    read(e, "min_flows", c.episode.min_flows);
    read(e, "max_flows", c.episode.max_flows);
    read(e, "embb_fraction", c.episode.embb_fraction);
    read(e, "n_slots", c.episode.n_slots);
    read(e, "slot_s", c.episode.slot_s);
    if (e.contains("fixed_flows")) {
      c.episode.fixed_flows.clear();
      for (const auto& f : e["fixed_flows"]) {
        check_keys(f, "fixed_flows[]", {"class", "src", "dst"});
        FlowSpec s;
        try {
          s.cls = slice_class_from_string(f.at("class").get<std::string>());
          s.src = f.at("src").get<std::string>();
          s.dst = f.at("dst").get<std::string>();
        } catch (const nlohmann::json::exception& ex) {
          throw ConfigError(std::string("fixed flow needs class, src and dst: ") + ex.what());
        }
        c.episode.fixed_flows.push_back(std::move(s));
      }
    }
  }
  if (j.contains("rl")) {
    const auto& r = j["rl"];
    check_keys(r, "rl",
               {"discount", "entropy", "gamma0", "gamma1", "lr_actor", "lr_critic", "initial_log_std",
                "squared_advantage", "reward_orientation"});
    read(r, "discount", c.rl.discount);
    read(r, "entropy", c.rl.entropy);
    read(r, "gamma0", c.rl.gamma0);
    read(r, "gamma1", c.rl.gamma1);
    read(r, "lr_actor", c.rl.lr_actor);
    read(r, "lr_critic", c.rl.lr_critic);
    read(r, "initial_log_std", c.rl.initial_log_std);
    read(r, "squared_advantage", c.rl.squared_advantage);
    if (r.contains("reward_orientation")) {
      c.rl.orientation = orientation_from(r["reward_orientation"].get<std::string>());
    }
  }
  if (j.contains("observation")) {
    const auto& o = j["observation"];
    check_keys(o, "observation", {"rate_scale", "memory_scale", "clip", "rate_flow_features"});
    read(o, "rate_scale", c.observation.rate_scale);
    read(o, "memory_scale", c.observation.memory_scale);
    read(o, "clip", c.observation.clip);
    read(o, "rate_flow_features", c.observation.rate_flow_features);
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    check_keys(n, "network", {"rate_hidden", "node_hidden", "actor_output_gain"});
    read(n, "rate_hidden", c.network.rate_hidden);
    read(n, "node_hidden", c.network.node_hidden);
    read(n, "actor_output_gain", c.network.actor_output_gain);
  }
  if (j.contains("ga")) {
    const auto& g = j["ga"];
    check_keys(g, "ga",
               {"population", "generations", "crossover_rate", "mutation_rate", "mutation_scale", "elitism",
                "tournament", "seed"});
    read(g, "population", c.ga.population);
    read(g, "generations", c.ga.generations);
    read(g, "crossover_rate", c.ga.crossover_rate);
    read(g, "mutation_rate", c.ga.mutation_rate);
    read(g, "mutation_scale", c.ga.mutation_scale);
    read(g, "elitism", c.ga.elitism);
    read(g, "tournament", c.ga.tournament);
    read(g, "seed", c.ga.seed);
  }
  if (j.contains("runs")) {
    const auto& r = j["runs"];
    check_keys(r, "runs",
               {"train_episodes", "transfer_episodes", "eval_episodes", "workers", "checkpoint_every",
                "eval_sample_actions"});
    read(r, "train_episodes", c.runs.train_episodes);
    read(r, "transfer_episodes", c.runs.transfer_episodes);
    read(r, "eval_episodes", c.runs.eval_episodes);
    read(r, "workers", c.runs.workers);
    read(r, "checkpoint_every", c.runs.checkpoint_every);
    read(r, "eval_sample_actions", c.eval_sample_actions);
  }
  read(j, "strategies", c.strategies);
  read(j, "out_dir", c.out_dir);
}

}  // namespace

ExperimentConfig paper_preset() { return ExperimentConfig{}; }

ExperimentConfig desk_preset() {
  ExperimentConfig c;
  c.preset = "desk";
  c.topology.builtin = "dumbbell";
  c.episode.fixed_flows = {{SliceClass::embb, "a1", "a3"}, {SliceClass::urllc, "a2", "a4"}};
  c.rl.lr_actor = 1e-3;
  c.rl.lr_critic = 1e-3;
  c.ga.generations = 100;
  c.runs.train_episodes = 2000;
  c.runs.transfer_episodes = 1000;
  c.runs.eval_episodes = 200;
  c.runs.checkpoint_every = 500;
  c.runs.workers = 4;
  return c;
}

ExperimentConfig preset(std::string_view name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected paper or desk)");
}

ExperimentConfig parse_config(std::string_view json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::string name = "paper";
  read(j, "preset", name);
  ExperimentConfig c = preset(name);
  overlay(j, c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

void validate(const ExperimentConfig& c) {
  c.embb_shape.validate();
  c.rl.validate();
  c.observation.validate();
  c.ga.validate();
  if (c.network.rate_hidden.empty() || c.network.node_hidden.empty()) {
    throw ConfigError("network hidden layers must not be empty");
  }
  if (!(c.network.actor_output_gain > 0.0) || !std::isfinite(c.network.actor_output_gain)) {
    throw ConfigError("actor_output_gain must be positive and finite");
  }
  if (c.runs.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.runs.eval_episodes < 1) throw ConfigError("eval_episodes must be at least 1");
  make_scenario(c);  // topology, traffic and episode checks
}

Topology make_topology(const TopologyConfig& config) {
  if (!config.file.empty()) {
    if (config.overrides != CapacityOverrides{}) {
      throw ConfigError("capacity overrides apply to built-in topologies only");
    }
    return load_topology_file(config.file);
  }
  return build_builtin(config.builtin, config.overrides);
}

Scenario make_scenario(const ExperimentConfig& config) {
  TrafficConfig traffic = config.traffic;
  if (config.pyramid_plus) {
    traffic.urllc.throughput.min *= 2.0;
    traffic.urllc.throughput.max *= 2.0;
  }
  return Scenario(make_topology(config.topology), PerformanceModel(config.embb_shape), config.episode, traffic);
}

std::uint64_t train_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 0x7121); }
std::uint64_t transfer_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 0x7F5E); }
std::uint64_t eval_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 0xE7A1); }

}  // namespace nsorch
