#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "drl_cases.hpp"
#include "nsorch/drl/a2c.hpp"
#include "nsorch/drl/adam.hpp"
#include "nsorch/drl/agent.hpp"
#include "nsorch/drl/checkpoint.hpp"
#include "nsorch/drl/observation.hpp"
#include "nsorch/drl/reward.hpp"

using namespace nsorch;
using namespace nsorch::drl;

namespace {
constexpr double G = 1e9;

Agent small_agent(std::uint64_t seed, AllocationKind kind = AllocationKind::rate) {
  std::mt19937_64 rng(seed);
  return make_agent({SliceClass::urllc, kind}, ObservationConfig{}, NetworkShape{}, 1e-3, 1e-3, -0.5, rng);
}
}  // namespace

TEST_CASE("mlp: zero and linear networks") {
  const Mlp zero({3, 4, 1});
  const std::vector<double> x{1.0, -2.0, 3.0};
  CHECK(zero.forward_scalar(x) == 0.0);

  Mlp lin({1, 1});
  auto p = lin.params_mut();
  p[0] = 2.5;
  p[1] = -0.75;
  const std::vector<double> in{4.0};
  CHECK(lin.forward_scalar(in) == 2.5 * 4.0 - 0.75);
  Mlp::Cache cache;
  lin.forward(in, &cache);
  std::vector<double> grad(2, 0.0);
  const std::vector<double> one{1.0};
  lin.backward(cache, one, grad);
  CHECK(grad[0] == 4.0);
  CHECK(grad[1] == 1.0);
  std::vector<double> none(2, 0.0);
  const std::vector<double> zero_out{0.0};
  lin.backward(cache, zero_out, none);
  CHECK(none == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mlp: forward matches an independent reference") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Mlp net = Mlp::he_init({11, 12, 6, 1}, rng);
    for (double& b : net.params_mut()) b += 0.1 * z(rng);
    std::vector<double> x(11);
    for (double& v : x) v = z(rng);
    const auto ours = net.forward(x);
    const auto ref = testing::reference_forward(net, x);
    CHECK(std::abs(ours[0] - ref[0]) <= 1e-12 * std::max(1.0, std::abs(ref[0])));
  }
}

TEST_CASE("mlp: backward matches central differences") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = Mlp::he_init({7, 8, 4, 1}, rng);
    std::vector<double> x(7);
    for (double& v : x) v = z(rng);
    Mlp::Cache cache;
    net.forward(x, &cache);
    std::vector<double> analytic(net.n_params(), 0.0);
    const std::vector<double> one{1.0};
    net.backward(cache, one, analytic);
    Mlp probe = net;
    auto p = probe.params_mut();
    const auto numeric = testing::central_differences(p, [&] { return probe.forward_scalar(x); }, 1e-5);
    CHECK(testing::relative_error(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("mlp: output gain scales only the last layer's weights") {
  std::mt19937_64 r1(5);
  std::mt19937_64 r2(5);
  const Mlp full = Mlp::he_init({4, 3, 2, 1}, r1);
  const Mlp small = Mlp::he_init({4, 3, 2, 1}, r2, 0.25);
  const std::size_t last = (4 * 3 + 3) + (3 * 2 + 2);  // first parameter of the output layer
  for (std::size_t i = 0; i < full.n_params(); ++i) {
    const double expect = i >= last && i < last + 2 ? 0.25 * full.params()[i] : full.params()[i];
    CHECK(small.params()[i] == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("agent: fresh actors start near half capacity") {
  std::mt19937_64 rng(21);
  for (AllocationKind kind : {AllocationKind::rate, AllocationKind::compute}) {
    const Agent a = small_agent(30, kind);
    for (const auto& t : testing::random_batch(50, a.actor.input_size(), rng)) {
      CHECK(std::abs(a.actor.forward_scalar(t.observation)) < 0.25);
    }
  }
}

TEST_CASE("mlp: a cache from before a parameter change is rejected") {
  std::mt19937_64 rng(3);
  Mlp net = Mlp::he_init({2, 3, 1}, rng);
  Mlp::Cache cache;
  const std::vector<double> x{1.0, 1.0};
  net.forward(x, &cache);
  net.params_mut()[0] += 1.0;
  std::vector<double> g(net.n_params(), 0.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(net.backward(cache, one, g), DrlError);
}

TEST_CASE("adam: first step has the size of the learning rate") {
  std::vector<double> p{0.5};
  AdamState s(1, 1e-3);
  const std::vector<double> g{1.0};
  CHECK(adam_step(p, g, s));
  CHECK(p[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-9));

  std::vector<double> q{0.5};
  AdamState t(1, 1e-3);
  const std::vector<double> zero{0.0};
  CHECK(adam_step(q, zero, t));
  CHECK(q[0] == 0.5);

  std::vector<double> r{0.5};
  AdamState u(1, 1e-3);
  const std::vector<double> bad{std::nan("")};
  CHECK_FALSE(adam_step(r, bad, u));
  CHECK(r[0] == 0.5);
  CHECK(u.rejected == 1);
  CHECK(u.step == 0);

  std::vector<double> a{1.0, 2.0};
  std::vector<double> b = a;
  AdamState sa(2, 1e-2);
  AdamState sb(2, 1e-2);
  const std::vector<double> grad{0.3, -0.7};
  adam_step(a, grad, sa);
  adam_step(b, grad, sb);
  CHECK(a == b);
  CHECK(sa == sb);
}

TEST_CASE("act: deterministic midpoint and squashing") {
  Agent a = small_agent(4);
  for (double& w : a.actor.params_mut()) w = 0.0;
  const std::vector<double> obs(11, 1.0);
  CHECK(act(a, obs, 50 * G, nullptr).demand == doctest::Approx(25 * G));
  a.actor.params_mut()[a.actor.n_params() - 1] = 2.0;
  a.log_std = -40.0;
  std::mt19937_64 rng(1);
  CHECK(act(a, obs, 50 * G, &rng).demand == doctest::Approx(50 * G * logistic(2.0)));
  CHECK(logistic(1000.0) <= 1.0);
  CHECK(logistic(-1000.0) >= 0.0);
}

TEST_CASE("act: sampled demands average to the squashed Gaussian expectation") {
  Agent a = small_agent(5);
  for (double& w : a.actor.params_mut()) w = 0.0;
  a.actor.params_mut()[a.actor.n_params() - 1] = 0.7;
  a.log_std = std::log(0.8);
  const std::vector<double> obs(11, 0.0);
  std::mt19937_64 rng(6);
  const int n = 20000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = act(a, obs, 1.0, &rng).demand;
    s += d;
    s2 += d * d;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  // Quadrature of logistic(mu + sigma z) against the standard normal density.
  double q = 0.0;
  const int m = 20000;
  const double lo = -10.0;
  const double dz = 20.0 / m;
  for (int i = 0; i < m; ++i) {
    const double zz = lo + (i + 0.5) * dz;
    q += 1.0 / (1.0 + std::exp(-(0.7 + 0.8 * zz))) * std::exp(-0.5 * zz * zz) * dz;
  }
  q /= std::sqrt(2.0 * std::numbers::pi);
  CHECK(std::abs(mean - q) < 3.0 * se);
}

TEST_CASE("rewards") {
  const Topology t = build_builtin("dumbbell");
  const Route r = t.route("a1", "a3");
  const FlowLayout layout(t, {{SliceClass::urllc, r}, {SliceClass::embb, r}});
  const std::vector<DemandVector> dem{{5 * G, 60 * G, 60 * G, 1e-3}, {5 * G, 60 * G, 60 * G, 20e-3}};
  SlotOutcome out = initial_outcome(layout, 0.1);
  for (std::size_t f = 0; f < 2; ++f) out.flows[f].assigned = {5 * G, 60 * G, 60 * G, dem[f].delay / 2};
  const PerformanceModel pm;
  const RewardWeights w;
  CHECK(reward_link(pm, layout, dem, out, 0, r.links[1], w) == doctest::Approx(2.2));
  CHECK(reward_node(pm, layout, dem, out, 1, r.nodes[0], Resource::memory, w) == doctest::Approx(1.1));
  CHECK(reward_link(pm, layout, dem, out, 0, r.links[1], RewardWeights{0.0, 0.0}) == 0.0);

  out.flows[0].assigned.delay = 2e-3;  // URLLC delay violated
  CHECK(link_score(pm, SliceClass::urllc, dem[0], out.flows[0].assigned, RewardOrientation::fulfillment) == 1.0);

  const FlowLayout solo(t, {{SliceClass::embb, r}});
  const std::vector<DemandVector> one{dem[1]};
  SlotOutcome half = initial_outcome(solo, 0.1);
  half.flows[0].assigned = {5 * G, 30 * G, 60 * G, 1e-3};
  CHECK(reward_node(pm, solo, one, half, 0, r.nodes[1], Resource::compute, w) == doctest::Approx(1.1 * 0.6875));
  const Route off = t.route("a2", "a4");
  CHECK_THROWS_AS(reward_link(pm, solo, one, half, 0, off.links[0], w), DrlError);
}

TEST_CASE("reward orientation: literal ratios invert the fulfilment ratios") {
  const PerformanceModel pm;
  const DemandVector d{10 * G, 60 * G, 60 * G, 20e-3};
  const AssignedVector g{5 * G, 30 * G, 120 * G, 10e-3};
  CHECK(node_score(pm, SliceClass::embb, Resource::compute, d, g, RewardOrientation::fulfillment) ==
        doctest::Approx(0.6875));
  CHECK(node_score(pm, SliceClass::embb, Resource::compute, d, g, RewardOrientation::literal) == 1.0);
  CHECK(node_score(pm, SliceClass::embb, Resource::memory, d, g, RewardOrientation::literal) ==
        doctest::Approx(0.6875));
}

TEST_CASE("advantage") {
  CHECK(advantage(1.0, 2.0, 2.0, 0.9, false) == doctest::Approx(0.8));
  CHECK(advantage(0.0, 0.0, 0.0, 0.9, false) == 0.0);
  CHECK(advantage(1.0, 2.0, 5.0, 0.9, true) == doctest::Approx(-1.0));
}

TEST_CASE("a2c: gradients match central differences") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Agent a = small_agent(100 + trial, trial % 2 ? AllocationKind::compute : AllocationKind::rate);
    testing::jitter(a, rng);
    const auto batch = testing::random_batch(1 + trial % 6, a.actor.input_size(), rng);
    RlConfig cfg;
    cfg.entropy = 0.01;
    cfg.squared_advantage = trial % 3 == 0;
    const auto err = testing::check_a2c_gradients(a, batch, cfg);
    CHECK(err.actor < 1e-4);
    CHECK(err.critic < 1e-4);
  }
}

TEST_CASE("a2c: zero advantages leave only the entropy term") {
  Agent a = small_agent(9);
  for (double& w : a.critic.params_mut()) w = 0.0;
  std::mt19937_64 rng(1);
  auto batch = testing::random_batch(4, a.actor.input_size(), rng);
  for (auto& t : batch) t.reward = 0.0;
  RlConfig cfg;
  cfg.entropy = 0.05;
  const auto g = a2c_gradients(a, batch, cfg);
  CHECK(g.critic_loss == 0.0);
  for (std::size_t i = 0; i + 1 < g.actor.size(); ++i) CHECK(g.actor[i] == 0.0);
  CHECK(g.actor.back() == doctest::Approx(-cfg.entropy));
}

TEST_CASE("a2c: a positive advantage makes the taken action more likely") {
  Agent a = small_agent(10);
  std::mt19937_64 rng(2);
  auto batch = testing::random_batch(1, a.actor.input_size(), rng);
  batch[0].done = true;
  batch[0].reward = a.critic.forward_scalar(batch[0].observation) + 1.0;
  RlConfig cfg;
  cfg.entropy = 0.0;
  cfg.lr_actor = 1e-2;
  a.actor_adam.lr = 1e-2;
  const double before = log_prob(batch[0].action, a.actor.forward_scalar(batch[0].observation), a.log_std);
  a2c_update(a, batch, cfg);
  const double after = log_prob(batch[0].action, a.actor.forward_scalar(batch[0].observation), a.log_std);
  CHECK(after > before);
}

TEST_CASE("a2c: stronger entropy bonus keeps a wider policy; updates are deterministic") {
  std::mt19937_64 rng(3);
  const auto batch = testing::random_batch(8, 11, rng);
  // One step each from the same start; multi-step Adam is not monotone in kappa.
  std::vector<double> widths;
  for (double kappa : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    Agent a = small_agent(11);
    RlConfig cfg;
    cfg.entropy = kappa;
    a2c_update(a, batch, cfg);
    widths.push_back(a.log_std);
  }
  for (std::size_t i = 1; i < widths.size(); ++i) CHECK(widths[i - 1] <= widths[i]);
  CHECK(widths.back() > small_agent(11).log_std);

  Agent x = small_agent(12);
  Agent y = small_agent(12);
  RlConfig cfg;
  a2c_update(x, batch, cfg);
  a2c_update(y, batch, cfg);
  CHECK(x == y);
}

TEST_CASE("checkpoint round trip is exact") {
  AgentBundle b = make_generalist_bundle(ObservationConfig{}, NetworkShape{}, 1e-3, 2e-3, -0.3, 77);
  std::mt19937_64 rng(4);
  const auto batch = testing::random_batch(5, 11, rng);
  a2c_update(b.at({"*", SliceClass::embb, AllocationKind::rate}), batch, RlConfig{});
  b.agents.emplace(AgentKey{"c1-c2", SliceClass::urllc, AllocationKind::rate},
                   b.at({"*", SliceClass::urllc, AllocationKind::rate}));
  std::stringstream ss;
  write_bundle(ss, b);
  CHECK(read_bundle(ss) == b);
  std::stringstream junk("NOTACHECKPOINT");
  CHECK_THROWS(read_bundle(junk));
  CHECK_THROWS(load_bundle("/nonexistent/missing.ckpt"));
}

TEST_CASE("bundle resolution prefers the element's own agent") {
  AgentBundle b = make_generalist_bundle(ObservationConfig{}, NetworkShape{}, 1e-3, 1e-3, 0.0, 1);
  CHECK(b.agents.size() == 6);
  CHECK(b.resolve("c1-c2", SliceClass::embb, AllocationKind::rate).scope == "*");
  b.agents.emplace(AgentKey{"c1-c2", SliceClass::embb, AllocationKind::rate}, Agent{});
  CHECK(b.resolve("c1-c2", SliceClass::embb, AllocationKind::rate).scope == "c1-c2");
  CHECK(b.resolve("a1-c1", SliceClass::embb, AllocationKind::rate).scope == "*");
}

TEST_CASE("observations at episode start and their layout") {
  const Topology t = build_builtin("dumbbell");
  const Route r = t.route("a1", "a3");
  const FlowLayout layout(t, {{SliceClass::urllc, r}});
  const std::vector<DemandVector> dem{{5 * G, 60 * G, 30 * G, 1e-3}};
  const SlotOutcome prev = initial_outcome(layout, 0.1);
  const ObservationContext ctx{&t, &layout, dem, &prev, 0.1};
  const auto flow = raw_flow_features(ctx, 0);
  for (std::size_t i = 4; i < 8; ++i) CHECK(flow[i] == 0.0);
  const auto link = raw_link_features(ctx, 0, 1);
  CHECK(link[0] == 50 * G);
  for (std::size_t i = 1; i < 7; ++i) CHECK(link[i] == 0.0);
  const auto node = raw_node_features(ctx, 0, 0, AllocationKind::memory);
  CHECK(node[0] == t.node(r.nodes[0]).memory_bits);
  for (std::size_t i = 1; i < 5; ++i) CHECK(node[i] == 0.0);

  const ObservationConfig cfg;
  const auto lo = link_observation(ctx, cfg, 0, 0);
  REQUIRE(lo.size() == 11);
  CHECK(lo[0] == doctest::Approx(0.1));   // eta / 50 Gbps
  CHECK(lo[1] == doctest::Approx(1.0));   // delay bound / delay bound
  CHECK(lo[2] == 0.0);
  CHECK(lo[4] == doctest::Approx(1.0));   // link capacity
  const auto no = node_observation(ctx, cfg, 0, 0, AllocationKind::memory);
  REQUIRE(no.size() == 7);
  CHECK(no[0] == doctest::Approx(0.5));   // 30 Gb / 60 Gb
  for (double v : no) CHECK((v >= 0.0 && v <= cfg.clip));
}
