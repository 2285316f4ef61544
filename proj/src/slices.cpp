#include "nsorch/slices.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsorch {

namespace {

constexpr double kShapeTolerance = 1e-12;

template <typename F>
Utility weighted_utility(std::span<const FlowSample> flows, F&& score) {
  if (flows.empty()) throw SliceError("utility of an empty flow set is undefined");
  std::array<double, 2> sum{0.0, 0.0};
  std::array<std::size_t, 2> count{0, 0};
  for (const auto& fs : flows) {
    const auto k = index_of(fs.cls);
    sum[k] += score(fs);
    ++count[k];
  }
  Utility u;
  if (count[0] > 0) u.embb = sum[0] / static_cast<double>(count[0]);
  if (count[1] > 0) u.urllc = sum[1] / static_cast<double>(count[1]);
  const double total = static_cast<double>(flows.size());
  u.overall = (static_cast<double>(count[0]) * u.embb.value_or(0.0) +
               static_cast<double>(count[1]) * u.urllc.value_or(0.0)) /
              total;
  return u;
}

}  // namespace

std::string_view to_string(SliceClass cls) { return cls == SliceClass::embb ? "embb" : "urllc"; }

SliceClass slice_class_from_string(std::string_view text) {
  if (text == "embb") return SliceClass::embb;
  if (text == "urllc") return SliceClass::urllc;
  throw SliceError("unknown slice class '" + std::string(text) + "'");
}

std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::throughput: return "eta";
    case Resource::compute: return "c";
    case Resource::memory: return "m";
    case Resource::delay: return "delta";
  }
  return "?";
}

double DemandVector::get(Resource r) const {
  switch (r) {
    case Resource::throughput: return throughput;
    case Resource::compute: return compute;
    case Resource::memory: return memory;
    case Resource::delay: return delay;
  }
  return 0.0;
}

double AssignedVector::get(Resource r) const {
  switch (r) {
    case Resource::throughput: return throughput;
    case Resource::compute: return compute;
    case Resource::memory: return memory;
    case Resource::delay: return delay;
  }
  return 0.0;
}

void validate(const DemandVector& r) {
  for (Resource res : kResources) {
    const double v = r.get(res);
    if (!(v > 0) || !std::isfinite(v)) {
      throw SliceError("demand for '" + std::string(to_string(res)) + "' must be positive and finite");
    }
  }
}

void validate(const AssignedVector& r) {
  for (Resource res : kResources) {
    const double v = r.get(res);
    if (!(v >= 0) || (res != Resource::delay && !std::isfinite(v))) {
      throw SliceError("assigned '" + std::string(to_string(res)) + "' must be non-negative");
    }
  }
}

void EmbbShape::validate() const {
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0)) throw SliceError("eMBB weights must be non-negative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > kShapeTolerance) throw SliceError("eMBB weights must sum to 1");

  const auto [b1, b2, b3] = beta;
  if (std::abs(b1 + b2 + b3 - 1.0) > kShapeTolerance) {
    throw SliceError("eMBB cubic must equal 1 at x = 1");
  }
  // f'' = 2 b2 + 6 b3 x is linear, so checking the endpoints covers [0,1].
  if (2 * b2 > kShapeTolerance || 2 * b2 + 6 * b3 > kShapeTolerance) {
    throw SliceError("eMBB cubic must be concave on [0,1]");
  }
  // Minimum of the quadratic f' on [0,1]: endpoints or its vertex.
  auto slope = [&](double x) { return b1 + 2 * b2 * x + 3 * b3 * x * x; };
  double min_slope = std::min(slope(0.0), slope(1.0));
  if (b3 != 0.0) {
    const double vertex = -b2 / (3 * b3);
    if (vertex > 0.0 && vertex < 1.0) min_slope = std::min(min_slope, slope(vertex));
  }
  if (min_slope < -kShapeTolerance) throw SliceError("eMBB cubic must be non-decreasing on [0,1]");
}

double fulfillment_ratio(Resource r, const DemandVector& demand, const AssignedVector& assigned) {
  if (r == Resource::delay) {
    if (std::isinf(assigned.delay)) return 0.0;
    if (assigned.delay <= 0.0) return std::numeric_limits<double>::infinity();
    return demand.delay / assigned.delay;
  }
  return assigned.get(r) / demand.get(r);
}

PerformanceModel::PerformanceModel(EmbbShape shape) : shape_(shape) { shape_.validate(); }

double PerformanceModel::f_embb(double x) const {
  if (!(x >= 0)) throw SliceError("fulfilment ratio must be non-negative");
  if (x >= 1.0) return 1.0;
  const auto& b = shape_.beta;
  return x * (b[0] + x * (b[1] + x * b[2]));
}

double PerformanceModel::f_urllc(double x) {
  if (!(x >= 0)) throw SliceError("fulfilment ratio must be non-negative");
  return x >= 1.0 ? 1.0 : 0.0;
}

double PerformanceModel::flow_performance(SliceClass cls, const DemandVector& demand,
                                          const AssignedVector& assigned) const {
  if (cls == SliceClass::embb) {
    double total = 0.0;
    for (Resource r : kResources) total += shape_.alpha_for(r) * resource_score(cls, r, demand, assigned);
    return total;
  }
  double product = 1.0;
  for (Resource r : kResources) product *= resource_score(cls, r, demand, assigned);
  return product;
}

Utility system_utility(const PerformanceModel& model, std::span<const FlowSample> flows) {
  return weighted_utility(flows, [&](const FlowSample& fs) {
    return model.flow_performance(fs.cls, fs.demand, fs.assigned);
  });
}

Utility resource_utility(const PerformanceModel& model, std::span<const FlowSample> flows, Resource r) {
  return weighted_utility(flows, [&](const FlowSample& fs) {
    return model.resource_score(fs.cls, r, fs.demand, fs.assigned);
  });
}

}  // namespace nsorch
