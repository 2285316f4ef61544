#include "nsorch/drl/a2c.hpp"

#include <cmath>
#include <numbers>

namespace nsorch::drl {

void RlConfig::validate() const {
  if (!(discount >= 0.0 && discount <= 1.0)) throw DrlError("discount must lie in [0,1]");
  if (!(entropy >= 0.0) || !(gamma0 >= 0.0) || !(gamma1 >= 0.0)) {
    throw DrlError("entropy and reward weights must be non-negative");
  }
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw DrlError("learning rates must be positive");
  if (!std::isfinite(initial_log_std)) throw DrlError("initial log std must be finite");
}

double advantage(double reward, double value, double next_value, double discount, bool done) {
  return reward + (done ? 0.0 : discount * next_value) - value;
}

namespace {

std::vector<double> targets_of(const Mlp& critic, std::span<const Transition> batch, double discount) {
  std::vector<double> t;
  t.reserve(batch.size());
  for (const auto& tr : batch) {
    const double next = tr.done ? 0.0 : critic.forward_scalar(tr.next_observation);
    t.push_back(tr.reward + discount * next);
  }
  return t;
}

}  // namespace

std::vector<double> advantages(const Agent& agent, std::span<const Transition> batch, double discount) {
  std::vector<double> a;
  a.reserve(batch.size());
  for (const auto& tr : batch) {
    const double v = agent.critic.forward_scalar(tr.observation);
    const double vn = tr.done ? 0.0 : agent.critic.forward_scalar(tr.next_observation);
    a.push_back(advantage(tr.reward, v, vn, discount, tr.done));
  }
  return a;
}

double log_prob(double action, double mean, double log_std) {
  const double z = (action - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gaussian_entropy(double log_std) { return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_std; }

double critic_loss(const Mlp& critic, std::span<const Transition> batch, std::span<const double> targets) {
  if (batch.empty() || targets.size() != batch.size()) throw DrlError("critic loss needs one target per transition");
  double s = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double a = targets[i] - critic.forward_scalar(batch[i].observation);
    s += a * a;
  }
  return s / static_cast<double>(batch.size());
}

double actor_loss(const Mlp& actor, double log_std, std::span<const Transition> batch,
                  std::span<const double> weights, double entropy) {
  if (batch.empty() || weights.size() != batch.size()) throw DrlError("actor loss needs one weight per transition");
  double s = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    s -= log_prob(batch[i].action, actor.forward_scalar(batch[i].observation), log_std) * weights[i];
  }
  return s / static_cast<double>(batch.size()) - entropy * gaussian_entropy(log_std);
}

A2cGradients a2c_gradients(const Agent& agent, std::span<const Transition> batch, const RlConfig& cfg) {
  if (batch.empty()) throw DrlError("empty A2C batch");
  const auto n = static_cast<double>(batch.size());
  A2cGradients g;
  g.targets = targets_of(agent.critic, batch, cfg.discount);
  g.critic.assign(agent.critic.n_params(), 0.0);
  g.actor.assign(agent.actor.n_params() + 1, 0.0);
  std::span<double> actor_net(g.actor.data(), agent.actor.n_params());

  const double var_inv = std::exp(-2.0 * agent.log_std);
  double d_log_std = 0.0;
  Mlp::Cache cache;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = batch[i];
    const double v = agent.critic.forward_scalar(tr.observation, &cache);
    const double a = g.targets[i] - v;
    g.critic_loss += a * a / n;
    const double dv = -2.0 * a / n;
    agent.critic.backward(cache, std::span<const double>(&dv, 1), g.critic);

    const double w = cfg.squared_advantage ? a * a : a;
    g.weights.push_back(w);
    const double mu = agent.actor.forward_scalar(tr.observation, &cache);
    const double diff = tr.action - mu;
    g.actor_loss -= log_prob(tr.action, mu, agent.log_std) * w / n;
    const double dmu = -w * diff * var_inv / n;
    agent.actor.backward(cache, std::span<const double>(&dmu, 1), actor_net);
    d_log_std -= w * (diff * diff * var_inv - 1.0) / n;
  }
  g.actor_loss -= cfg.entropy * gaussian_entropy(agent.log_std);
  g.actor.back() = d_log_std - cfg.entropy;
  return g;
}

LossReport a2c_update(Agent& agent, std::span<const Transition> batch, const RlConfig& cfg) {
  const A2cGradients g = a2c_gradients(agent, batch, cfg);
  LossReport rep;
  rep.n = batch.size();
  rep.actor_loss = g.actor_loss;
  rep.critic_loss = g.critic_loss;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rep.mean_reward += batch[i].reward;
    rep.mean_advantage += g.targets[i] - agent.critic.forward_scalar(batch[i].observation);
  }
  rep.mean_reward /= static_cast<double>(batch.size());
  rep.mean_advantage /= static_cast<double>(batch.size());

  const bool finite_losses = std::isfinite(g.actor_loss) && std::isfinite(g.critic_loss);
  if (!finite_losses) {
    ++agent.actor_adam.rejected;
    ++agent.critic_adam.rejected;
    rep.actor_skipped = rep.critic_skipped = true;
  } else {
    std::vector<double> theta(agent.actor.params().begin(), agent.actor.params().end());
    theta.push_back(agent.log_std);
    rep.actor_skipped = !adam_step(theta, g.actor, agent.actor_adam);
    if (!rep.actor_skipped) {
      auto p = agent.actor.params_mut();
      std::copy(theta.begin(), theta.end() - 1, p.begin());
      agent.log_std = theta.back();
    }
    rep.critic_skipped = !adam_step(agent.critic.params_mut(), g.critic, agent.critic_adam);
  }
  rep.entropy = gaussian_entropy(agent.log_std);
  return rep;
}

}  // namespace nsorch::drl
