#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "nsorch/drl/a2c.hpp"
#include "nsorch/drl/agent.hpp"
#include "nsorch/drl/mlp.hpp"

namespace nsorch::testing {

/// Forward pass written from the parameter layout alone.
inline std::vector<double> reference_forward(const drl::Mlp& net, std::span<const double> input) {
  const auto& sizes = net.sizes();
  const auto p = net.params();
  std::vector<double> x(input.begin(), input.end());
  std::size_t off = 0;
  for (std::size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
    const std::size_t in = sizes[layer];
    const std::size_t out = sizes[layer + 1];
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = p[off + in * out + o];
      for (std::size_t i = 0; i < in; ++i) s += p[off + o * in + i] * x[i];
      const bool hidden = layer + 2 < sizes.size();
      y[o] = hidden ? std::max(0.0, s) : s;
    }
    off += in * out + out;
    x = std::move(y);
  }
  return x;
}

inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nb));
  return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

/// Central differences of `f` around `x`, restoring each entry.
template <typename F>
std::vector<double> central_differences(std::span<double> x, F&& f, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline std::vector<drl::Transition> random_batch(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<drl::Transition> batch(n);
  for (auto& t : batch) {
    for (std::size_t i = 0; i < dim; ++i) {
      t.observation.push_back(u(rng));
      t.next_observation.push_back(u(rng));
    }
    t.action = z(rng);
    t.reward = 2.0 * u(rng);
    t.done = (rng() % 5) == 0;
  }
  return batch;
}

/// Adds small noise to every parameter. Fresh networks have zero biases, so
/// a sample whose first hidden layer is entirely inactive puts the next
/// layer exactly on the rectifier kink, where no derivative exists and
/// central differences report half the one-sided slope.
inline void jitter(drl::Agent& agent, std::mt19937_64& rng, double scale = 0.05) {
  std::normal_distribution<double> z(0.0, scale);
  for (double& p : agent.actor.params_mut()) p += z(rng);
  for (double& p : agent.critic.params_mut()) p += z(rng);
}

struct GradientCheck {
  double actor = 0.0;
  double critic = 0.0;
};

/// Relative error of the analytic A2C gradients against central
/// differences of the scalar losses, with targets and weights frozen.
inline GradientCheck check_a2c_gradients(const drl::Agent& agent, std::span<const drl::Transition> batch,
                                         const drl::RlConfig& cfg, double h = 1e-5) {
  const drl::A2cGradients g = drl::a2c_gradients(agent, batch, cfg);

  drl::Mlp critic = agent.critic;
  auto cp = critic.params_mut();
  const auto num_c = central_differences(cp, [&] { return drl::critic_loss(critic, batch, g.targets); }, h);

  drl::Mlp actor = agent.actor;
  std::vector<double> theta(actor.params().begin(), actor.params().end());
  theta.push_back(agent.log_std);
  auto loss = [&] {
    auto p = actor.params_mut();
    std::copy(theta.begin(), theta.end() - 1, p.begin());
    return drl::actor_loss(actor, theta.back(), batch, g.weights, cfg.entropy);
  };
  const auto num_a = central_differences(std::span<double>(theta), loss, h);
  return {relative_error(g.actor, num_a), relative_error(g.critic, num_c)};
}

}  // namespace nsorch::testing
