#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace nsorch::drl {

class DrlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected net with rectifier hidden layers and an identity output.
/// Parameters are stored flat: for each layer, the weights (out x in,
/// row-major) followed by the biases.
class Mlp {
 public:
  struct Cache {
    std::uint64_t version = 0;
    // activations[0] is the input, activations[k] the output of layer k
    // (after the rectifier for hidden layers).
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;
  /// All parameters zero.
  explicit Mlp(std::vector<std::size_t> sizes);
  /// He-normal weights, zero biases. The last layer's weights are further
  /// multiplied by `output_gain`.
  static Mlp he_init(std::vector<std::size_t> sizes, std::mt19937_64& rng, double output_gain = 1.0);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t n_params() const { return params_.size(); }

  std::span<const double> params() const { return params_; }
  /// Mutable view; invalidates outstanding caches.
  std::span<double> params_mut() {
    ++version_;
    return params_;
  }

  std::vector<double> forward(std::span<const double> input, Cache* cache = nullptr) const;
  double forward_scalar(std::span<const double> input, Cache* cache = nullptr) const;

  /// Adds d(output . grad_output)/d(params) into `grad_params`.
  void backward(const Cache& cache, std::span<const double> grad_output, std::span<double> grad_params) const;

  bool operator==(const Mlp& other) const { return sizes_ == other.sizes_ && params_ == other.params_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

}  // namespace nsorch::drl
