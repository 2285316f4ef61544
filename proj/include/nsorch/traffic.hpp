#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "nsorch/slices.hpp"

namespace nsorch {

class TrafficError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ResourceRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ResourceRange&) const = default;
};

/// Demand ranges of one slice class plus its (fixed) delay bound.
struct ClassTrafficProfile {
  ResourceRange throughput;
  ResourceRange compute;
  ResourceRange memory;
  double delay_bound_s = 0.0;

  bool operator==(const ClassTrafficProfile&) const = default;
};

/// Reference ranges for each class; `double_urllc_rate` gives the variant
/// with twice the URLLC throughput requirement.
ClassTrafficProfile default_traffic_profile(SliceClass cls, bool double_urllc_rate = false);

/// Birth-death Markov chain whose states map linearly onto demand vectors.
class MarkovDemandModel {
 public:
  static MarkovDemandModel build(SliceClass cls, const ClassTrafficProfile& profile,
                                 std::size_t n_states = 10, double stay_prob = 0.6);

  SliceClass slice_class() const { return cls_; }
  std::size_t n_states() const { return demands_.size(); }
  double transition(std::size_t from, std::size_t to) const;
  const DemandVector& demand(std::size_t state) const { return demands_.at(state); }

  /// Exact stationary distribution via detailed balance.
  std::vector<double> stationary_distribution() const;
  /// Expected demand under the stationary distribution.
  DemandVector average_demand() const;

  /// Samples the successor of `state` from a uniform draw u in [0, 1).
  std::size_t next_state(std::size_t state, double u) const;

 private:
  SliceClass cls_ = SliceClass::embb;
  // Tridiagonal storage: down[i] = P(i, i-1), stay[i] = P(i, i), up[i] = P(i, i+1).
  std::vector<double> down_;
  std::vector<double> stay_;
  std::vector<double> up_;
  std::vector<DemandVector> demands_;
};

/// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Independent demand chain carried by a single flow.
class FlowDemandProcess {
 public:
  FlowDemandProcess(const MarkovDemandModel* model, std::size_t initial_state, std::uint64_t seed);

  std::size_t state() const { return state_; }
  const DemandVector& current() const { return model_->demand(state_); }
  const DemandVector& step();

 private:
  const MarkovDemandModel* model_;
  std::size_t state_;
  std::mt19937_64 rng_;
};

/// Stateless seed derivation (splitmix64 mixing) for independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace nsorch
