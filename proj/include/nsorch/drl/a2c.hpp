#pragma once

#include <span>
#include <vector>

#include "nsorch/drl/agent.hpp"
#include "nsorch/drl/reward.hpp"

namespace nsorch::drl {

struct RlConfig {
  double discount = 0.9;   // lambda
  double entropy = 1e-4;   // kappa
  double gamma0 = 0.1;
  double gamma1 = 1.0;
  double lr_actor = 1e-5;
  double lr_critic = 1e-5;
  double initial_log_std = 0.0;
  bool squared_advantage = false;  // weight the score function by A^2 instead of A
  RewardOrientation orientation = RewardOrientation::fulfillment;

  RewardWeights reward_weights() const { return {gamma0, gamma1, orientation}; }
  void validate() const;
  bool operator==(const RlConfig&) const = default;
};

struct Transition {
  std::vector<double> observation;
  double action = 0.0;  // pre-squash sample
  double demand = 0.0;
  double reward = 0.0;
  std::vector<double> next_observation;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

double advantage(double reward, double value, double next_value, double discount, bool done);

/// Advantages under the current critic, one per transition.
std::vector<double> advantages(const Agent& agent, std::span<const Transition> batch, double discount);

/// Gaussian log-density of `action` under N(mean, exp(log_std)^2).
double log_prob(double action, double mean, double log_std);
double gaussian_entropy(double log_std);

/// Mean squared error of the critic against fixed targets r + lambda V'(s').
double critic_loss(const Mlp& critic, std::span<const Transition> batch, std::span<const double> targets);

/// -mean(log pi(a|s) * weight) - kappa * H, with the weights held constant.
double actor_loss(const Mlp& actor, double log_std, std::span<const Transition> batch,
                  std::span<const double> weights, double entropy);

struct A2cGradients {
  std::vector<double> actor;  // network parameters, then log_std
  std::vector<double> critic;
  std::vector<double> targets;
  std::vector<double> weights;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

/// Analytic gradients of both losses. Targets and advantage weights are
/// computed from the current critic and treated as constants.
A2cGradients a2c_gradients(const Agent& agent, std::span<const Transition> batch, const RlConfig& cfg);

struct LossReport {
  std::size_t n = 0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double mean_reward = 0.0;
  double mean_advantage = 0.0;
  double entropy = 0.0;  // after the update
  bool actor_skipped = false;
  bool critic_skipped = false;
};

/// One Adam step on the actor (with log_std) and one on the critic.
LossReport a2c_update(Agent& agent, std::span<const Transition> batch, const RlConfig& cfg);

}  // namespace nsorch::drl
