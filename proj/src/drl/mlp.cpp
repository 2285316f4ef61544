#include "nsorch/drl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsorch::drl {

namespace {

std::size_t count_params(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw DrlError("an MLP needs at least an input and an output layer");
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (sizes[k] == 0 || sizes[k + 1] == 0) throw DrlError("MLP layer sizes must be positive");
    n += sizes[k + 1] * (sizes[k] + 1);
  }
  return n;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)), params_(count_params(sizes_), 0.0) {}

Mlp Mlp::he_init(std::vector<std::size_t> sizes, std::mt19937_64& rng, double output_gain) {
  Mlp net(std::move(sizes));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t off = 0;
  for (std::size_t k = 0; k + 1 < net.sizes_.size(); ++k) {
    const std::size_t in = net.sizes_[k];
    const std::size_t out = net.sizes_[k + 1];
    double scale = std::sqrt(2.0 / static_cast<double>(in));
    if (k + 2 == net.sizes_.size()) scale *= output_gain;
    for (std::size_t i = 0; i < in * out; ++i) net.params_[off + i] = gauss(rng) * scale;
    off += out * (in + 1);
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input, Cache* cache) const {
  if (input.size() != input_size()) {
    throw DrlError("MLP input has " + std::to_string(input.size()) + " entries, expected " +
                   std::to_string(input_size()));
  }
  std::vector<double> x(input.begin(), input.end());
  if (cache != nullptr) {
    cache->version = version_;
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  std::size_t off = 0;
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const std::size_t in = sizes_[k];
    const std::size_t out = sizes_[k + 1];
    const double* w = params_.data() + off;
    const double* b = w + in * out;
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * x[i];
      y[o] = (k + 1 < n_layers) ? std::max(0.0, s) : s;
    }
    off += out * (in + 1);
    x = std::move(y);
    if (cache != nullptr) cache->activations.push_back(x);
  }
  return x;
}

double Mlp::forward_scalar(std::span<const double> input, Cache* cache) const {
  if (output_size() != 1) throw DrlError("forward_scalar needs a single output");
  return forward(input, cache).front();
}

void Mlp::backward(const Cache& cache, std::span<const double> grad_output, std::span<double> grad_params) const {
  if (cache.version != version_ || cache.activations.size() != sizes_.size()) {
    throw DrlError("stale MLP cache: parameters changed since the forward pass");
  }
  if (grad_output.size() != output_size()) throw DrlError("output gradient has the wrong length");
  if (grad_params.size() != n_params()) throw DrlError("parameter gradient has the wrong length");

  std::vector<std::size_t> offsets(sizes_.size() - 1);
  for (std::size_t k = 0, off = 0; k + 1 < sizes_.size(); ++k) {
    offsets[k] = off;
    off += sizes_[k + 1] * (sizes_[k] + 1);
  }

  std::vector<double> delta(grad_output.begin(), grad_output.end());
  for (std::size_t k = sizes_.size() - 1; k-- > 0;) {
    const std::size_t in = sizes_[k];
    const std::size_t out = sizes_[k + 1];
    const bool hidden = k + 2 < sizes_.size();
    if (hidden) {
      // Rectifier derivative, taken as 0 at the kink.
      const auto& a = cache.activations[k + 1];
      for (std::size_t o = 0; o < out; ++o) {
        if (a[o] <= 0.0) delta[o] = 0.0;
      }
    }
    const auto& x = cache.activations[k];
    const double* w = params_.data() + offsets[k];
    double* gw = grad_params.data() + offsets[k];
    double* gb = gw + in * out;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] += d * x[i];
        prev[i] += d * w[o * in + i];
      }
    }
    delta = std::move(prev);
  }
}

}  // namespace nsorch::drl
