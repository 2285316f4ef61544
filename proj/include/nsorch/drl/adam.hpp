#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nsorch::drl {

struct AdamState {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::uint64_t rejected = 0;  // updates skipped because of a non-finite gradient
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n_params, double learning_rate) : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {}

  bool operator==(const AdamState&) const = default;
};

/// Bias-corrected Adam update. Returns false, leaving both parameters and
/// moments untouched, if any gradient entry is non-finite.
bool adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace nsorch::drl
