#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "nsorch/ga.hpp"
#include "nsorch/orchestrator.hpp"
#include "oracles.hpp"

using namespace nsorch;

namespace {
constexpr double G = 1e9;

Scenario dumbbell_scenario(EpisodeConfig ep = {}) {
  ep.n_slots = 10;
  return Scenario(build_builtin("dumbbell"), PerformanceModel{}, ep, TrafficConfig{});
}

/// Asks every element for a fixed fraction of its capacity.
class FractionStrategy final : public AllocationStrategy {
 public:
  explicit FractionStrategy(double f) : f_(f) {}
  std::string name() const override { return "fraction"; }
  std::unique_ptr<AllocationStrategy> clone() const override { return std::make_unique<FractionStrategy>(*this); }
  std::vector<FlowDemands> decide(const SlotContext& ctx) override {
    std::vector<FlowDemands> out(ctx.layout->size());
    for (std::size_t f = 0; f < out.size(); ++f) {
      const Route& r = ctx.layout->flow(f).route;
      for (auto l : r.links) out[f].link_rate.push_back(f_ * ctx.topology->link(l).rate_bps);
      for (auto n : r.nodes) {
        out[f].compute.push_back(f_ * ctx.topology->node(n).compute_bps);
        out[f].memory.push_back(f_ * ctx.topology->node(n).memory_bits);
      }
    }
    return out;
  }

 private:
  double f_;
};
}  // namespace

TEST_CASE("spawned flow counts are uniform over the configured range") {
  const Scenario scn = dumbbell_scenario();
  std::mt19937_64 rng(1);
  std::vector<double> hist(7, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto flows = spawn_flows(scn, rng);
    hist[flows.size()] += 1.0 / n;
  }
  std::vector<double> expect(7, 0.0);
  for (std::size_t k = 2; k <= 6; ++k) expect[k] = 0.2;
  CHECK(hist[0] == 0.0);
  CHECK(hist[1] == 0.0);
  CHECK(testing::total_variation(hist, expect) < 0.02);
}

TEST_CASE("spawned flows use distinct access endpoints and honour the class mix") {
  EpisodeConfig ep;
  ep.embb_fraction = 0.0;
  const Scenario scn = dumbbell_scenario(ep);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    for (const auto& f : spawn_flows(scn, rng)) {
      CHECK(f.spec.cls == SliceClass::urllc);
      CHECK(f.spec.src != f.spec.dst);
      CHECK(f.initial_state < 10);
    }
  }
  std::mt19937_64 a(7);
  std::mt19937_64 b(7);
  const auto fa = spawn_flows(scn, a);
  const auto fb = spawn_flows(scn, b);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].spec == fb[i].spec);
    CHECK(fa[i].chain_seed == fb[i].chain_seed);
  }
}

TEST_CASE("episode config validation") {
  const Topology t = build_builtin("dumbbell");
  EpisodeConfig ep;
  CHECK_NOTHROW(ep.validate(t));
  ep.min_flows = 0;
  CHECK_THROWS(ep.validate(t));
  ep = {};
  ep.fixed_flows = {{SliceClass::embb, "a1", "zz"}};
  CHECK_THROWS(ep.validate(t));
}

TEST_CASE("an all-URLLC episode reports no eMBB utility") {
  EpisodeConfig ep;
  ep.embb_fraction = 0.0;
  const Scenario scn = dumbbell_scenario(ep);
  EmpiricalStrategy s;
  const EvalRow row = run_episode(scn, s, 3, 11);
  CHECK_FALSE(row.omega_e.has_value());
  REQUIRE(row.omega_u.has_value());
  CHECK(row.omega == doctest::Approx(*row.omega_u));
}

TEST_CASE("ample capacity with full demands gives full utility; zero demands give none") {
  const std::string doc = R"({"name":"big","nodes":[
      {"id":"x","kind":"access","compute_bps":10000000000000,"memory_bits":10000000000000,"routing_delay_s":0},
      {"id":"k","kind":"core","compute_bps":10000000000000,"memory_bits":10000000000000,"routing_delay_s":0},
      {"id":"y","kind":"access","compute_bps":10000000000000,"memory_bits":10000000000000,"routing_delay_s":0}],
    "links":[{"id":"x-k","a":"x","b":"k","rate_bps":1000000000000,"propagation_delay_s":0.0001},
             {"id":"k-y","a":"k","b":"y","rate_bps":1000000000000,"propagation_delay_s":0.0001}]})";
  EpisodeConfig ep;
  ep.fixed_flows = {{SliceClass::urllc, "x", "y"}, {SliceClass::embb, "y", "x"}};
  ep.n_slots = 20;
  TrafficConfig tc;
  tc.stay_prob = 1.0;
  const Scenario scn(load_topology(doc), PerformanceModel{}, ep, tc);
  FractionStrategy full(0.4);
  const EvalRow row = run_episode(scn, full, 0, 5);
  CHECK(row.omega == 1.0);
  CHECK(row.omega_eta == 1.0);
  CHECK(row.omega_delta == 1.0);

  FractionStrategy none(0.0);
  const EvalRow zero = run_episode(scn, none, 0, 5);
  CHECK(zero.omega_eta == 0.0);
  CHECK(zero.omega_delta == 0.0);
  CHECK(zero.omega == 0.0);
}

TEST_CASE("evaluation is reproducible and independent of execution mode") {
  const Scenario scn = dumbbell_scenario();
  const EmpiricalStrategy s;
  const auto a = evaluate(scn, s, 0, 16, 99, Execution::serial);
  const auto b = evaluate(scn, s, 0, 16, 99, Execution::parallel);
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].episode == i);
  const auto tail = evaluate(scn, s, 8, 8, 99, Execution::serial);
  CHECK(std::equal(tail.begin(), tail.end(), a.begin() + 8));
  CHECK(evaluate(scn, s, 0, 16, 100, Execution::serial) != a);
}

TEST_CASE("paired strategies see identical flows") {
  const Scenario scn = dumbbell_scenario();
  const EmpiricalStrategy e;
  const FractionStrategy f(0.1);
  const auto a = evaluate(scn, e, 0, 20, 5, Execution::serial);
  const auto b = evaluate(scn, f, 0, 20, 5, Execution::serial);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].n_flows == b[i].n_flows);
}

TEST_CASE("quantiles and summaries") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile(v, 0.5) == 2.5);
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK_FALSE(summarize({}).has_value());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(1 + t % 17);
    for (double& y : x) y = u(rng);
    const Summary s = *summarize(x);
    CHECK(s.p25 <= s.median);
    CHECK(s.median <= s.p75);
    CHECK(s.count == x.size());
    CHECK(s.mean >= *std::min_element(x.begin(), x.end()));
    CHECK(s.mean <= *std::max_element(x.begin(), x.end()));
  }
  std::vector<EvalRow> rows(3);
  rows[0].omega_e = 0.5;
  const auto m = summarize_rows(rows);
  CHECK(m.at("omega_e")->count == 1);
  CHECK_FALSE(m.at("omega_u").has_value());
}

TEST_CASE("one training episode updates each acting agent exactly once") {
  EpisodeConfig ep;
  ep.fixed_flows = {{SliceClass::embb, "a1", "a3"}, {SliceClass::urllc, "a2", "a4"}};
  const Scenario scn = dumbbell_scenario(ep);
  drl::AgentBundle b = drl::make_generalist_bundle({}, {}, 1e-3, 1e-3, 0.0, 1);
  const drl::AgentBundle before = b;
  TrainConfig tc;
  tc.episodes = 1;
  tc.seed = 3;
  std::vector<CurveRow> curve;
  const TrainStats st = train(scn, b, tc, curve);
  CHECK(st.episodes == 1);
  CHECK(st.updates == 6);
  CHECK(curve.size() == 1);
  for (const auto& [key, agent] : b.agents) {
    CHECK(agent.actor_adam.step + agent.actor_adam.rejected == 1);
    CHECK(agent.critic_adam.step + agent.critic_adam.rejected == 1);
    CHECK_FALSE(agent == before.at(key));
  }
}

TEST_CASE("training is reproducible across execution modes") {
  const Scenario scn = dumbbell_scenario();
  TrainConfig tc;
  tc.episodes = 6;
  tc.workers = 3;
  tc.seed = 12;
  drl::AgentBundle a = drl::make_generalist_bundle({}, {}, 1e-3, 1e-3, 0.0, 4);
  drl::AgentBundle b = a;
  std::vector<CurveRow> ca;
  std::vector<CurveRow> cb;
  train(scn, a, tc, ca, Execution::serial);
  train(scn, b, tc, cb, Execution::parallel);
  CHECK(a == b);
  CHECK(ca == cb);
  CHECK(ca.size() == 6);
  CHECK(ca[5].episode == 5);
}

TEST_CASE("evaluating a trained bundle leaves it unchanged") {
  const Scenario scn = dumbbell_scenario();
  const auto bundle = std::make_shared<const drl::AgentBundle>(drl::make_generalist_bundle({}, {}, 1e-3, 1e-3, 0.0, 5));
  const drl::AgentBundle copy = *bundle;
  const drl::DrlStrategy s(bundle, drl::RlConfig{}, false, false);
  evaluate(scn, s, 0, 8, 1, Execution::parallel);
  CHECK(*bundle == copy);
}

TEST_CASE("transfer: zero episodes replicate the source on every element") {
  const Scenario scn = dumbbell_scenario();
  const drl::AgentBundle src = drl::make_generalist_bundle({}, {}, 1e-3, 1e-3, 0.0, 6);
  TrainConfig tc;
  tc.episodes = 0;
  std::vector<CurveRow> curve;
  const drl::AgentBundle out = transfer(scn, src, tc, curve);
  const Topology& t = scn.topology();
  CHECK(out.agents.size() == 2 * t.links().size() + 4 * t.nodes().size());
  CHECK(curve.empty());
  for (const auto& [key, agent] : out.agents) {
    CHECK(key.scope != std::string(drl::kSharedScope));
    CHECK(agent == src.at({std::string(drl::kSharedScope), key.cls, key.kind}));
  }
  CHECK(specialize(t, src) == out);
}

TEST_CASE("transfer: fine-tuning makes element copies diverge") {
  EpisodeConfig ep;
  ep.fixed_flows = {{SliceClass::embb, "a1", "a3"}, {SliceClass::urllc, "a2", "a4"}};
  const Scenario scn = dumbbell_scenario(ep);
  const drl::AgentBundle src = drl::make_generalist_bundle({}, {}, 1e-3, 1e-3, 0.0, 7);
  TrainConfig tc;
  tc.episodes = 2;
  tc.seed = 8;
  std::vector<CurveRow> curve;
  const drl::AgentBundle out = transfer(scn, src, tc, curve);
  const auto& shared = src.at({std::string(drl::kSharedScope), SliceClass::embb, AllocationKind::rate});
  const auto& used = out.at({"a1-c1", SliceClass::embb, AllocationKind::rate});
  const auto& idle = out.at({"a2-c1", SliceClass::embb, AllocationKind::rate});
  CHECK_FALSE(used == shared);
  CHECK(idle == shared);
}
