#include "nsorch/traffic.hpp"

#include <cmath>
#include <string>

namespace nsorch {

namespace {

constexpr double kGiga = 1e9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_range(const ResourceRange& r, const char* what) {
  if (!(r.min > 0) || !(r.min <= r.max) || !std::isfinite(r.max)) {
    throw TrafficError(std::string("invalid ") + what + " range");
  }
}

double lerp(const ResourceRange& r, double frac) { return r.min + frac * (r.max - r.min); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

ClassTrafficProfile default_traffic_profile(SliceClass cls, bool double_urllc_rate) {
  ClassTrafficProfile p;
  p.compute = {50 * kGiga, 100 * kGiga};
  p.memory = {50 * kGiga, 100 * kGiga};
  if (cls == SliceClass::embb) {
    p.throughput = {0.30 * kGiga, 42.5 * kGiga};
    p.delay_bound_s = 20e-3;
  } else {
    p.throughput = {2.08 * kGiga, 10 * kGiga};
    if (double_urllc_rate) p.throughput = {4.16 * kGiga, 20 * kGiga};
    p.delay_bound_s = 1e-3;
  }
  return p;
}

MarkovDemandModel MarkovDemandModel::build(SliceClass cls, const ClassTrafficProfile& profile,
                                           std::size_t n_states, double stay_prob) {
  check_range(profile.throughput, "throughput");
  check_range(profile.compute, "compute");
  check_range(profile.memory, "memory");
  if (!(profile.delay_bound_s > 0) || !std::isfinite(profile.delay_bound_s)) {
    throw TrafficError("delay bound must be positive");
  }
  if (n_states < 2) throw TrafficError("a demand chain needs at least two states");
  if (!(stay_prob >= 0.0 && stay_prob <= 1.0)) throw TrafficError("stay probability must lie in [0,1]");

  MarkovDemandModel m;
  m.cls_ = cls;
  m.down_.assign(n_states, 0.0);
  m.stay_.assign(n_states, stay_prob);
  m.up_.assign(n_states, 0.0);
  const double move = 1.0 - stay_prob;
  for (std::size_t i = 0; i < n_states; ++i) {
    if (i == 0) {
      m.up_[i] = move;
    } else if (i + 1 == n_states) {
      m.down_[i] = move;
    } else {
      m.down_[i] = move / 2;
      m.up_[i] = move / 2;
    }
    const double frac = static_cast<double>(i) / static_cast<double>(n_states - 1);
    m.demands_.push_back({lerp(profile.throughput, frac), lerp(profile.compute, frac),
                          lerp(profile.memory, frac), profile.delay_bound_s});
  }
  return m;
}

double MarkovDemandModel::transition(std::size_t from, std::size_t to) const {
  if (from >= n_states() || to >= n_states()) throw TrafficError("state out of range");
  if (to == from) return stay_[from];
  if (to + 1 == from) return down_[from];
  if (to == from + 1) return up_[from];
  return 0.0;
}

std::vector<double> MarkovDemandModel::stationary_distribution() const {
  const std::size_t n = n_states();
  // An absorbing chain (stay = 1) keeps every state; report uniform mass.
  std::vector<double> pi(n, 1.0);
  bool reducible = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (up_[i] == 0.0 || down_[i + 1] == 0.0) reducible = true;
  }
  if (!reducible) {
    for (std::size_t i = 1; i < n; ++i) pi[i] = pi[i - 1] * up_[i - 1] / down_[i];
  }
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

DemandVector MarkovDemandModel::average_demand() const {
  const auto pi = stationary_distribution();
  DemandVector avg{0.0, 0.0, 0.0, demands_.front().delay};
  for (std::size_t i = 0; i < pi.size(); ++i) {
    avg.throughput += pi[i] * demands_[i].throughput;
    avg.compute += pi[i] * demands_[i].compute;
    avg.memory += pi[i] * demands_[i].memory;
  }
  return avg;
}

std::size_t MarkovDemandModel::next_state(std::size_t state, double u) const {
  if (u < down_[state]) return state - 1;
  if (u < down_[state] + stay_[state]) return state;
  if (up_[state] > 0.0) return state + 1;
  // Rounding slack at the top of [0,1): fall back to staying put.
  return state;
}

FlowDemandProcess::FlowDemandProcess(const MarkovDemandModel* model, std::size_t initial_state,
                                     std::uint64_t seed)
    : model_(model), state_(initial_state), rng_(seed) {
  if (model_ == nullptr) throw TrafficError("demand process needs a model");
  if (initial_state >= model_->n_states()) throw TrafficError("initial state out of range");
}

const DemandVector& FlowDemandProcess::step() {
  state_ = model_->next_state(state_, unit_uniform(rng_));
  return current();
}

}  // namespace nsorch
