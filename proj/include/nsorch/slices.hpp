#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

namespace nsorch {

class SliceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SliceClass { embb, urllc };
inline constexpr std::array<SliceClass, 2> kSliceClasses{SliceClass::embb, SliceClass::urllc};

std::string_view to_string(SliceClass cls);
SliceClass slice_class_from_string(std::string_view text);
constexpr std::size_t index_of(SliceClass cls) { return cls == SliceClass::embb ? 0 : 1; }

enum class Resource { throughput, compute, memory, delay };
inline constexpr std::array<Resource, 4> kResources{Resource::throughput, Resource::compute,
                                                     Resource::memory, Resource::delay};
std::string_view to_string(Resource r);

inline constexpr double kUnboundedDelay = std::numeric_limits<double>::infinity();

/// Per-slot requirements of a flow: throughput [bps], compute [bps],
/// memory [bits], delay bound [s].
struct DemandVector {
  double throughput = 0.0;
  double compute = 0.0;
  double memory = 0.0;
  double delay = 0.0;

  double get(Resource r) const;
  bool operator==(const DemandVector&) const = default;
};

/// Resources actually granted to a flow in one slot. `delay` is +inf while
/// the flow receives no service.
struct AssignedVector {
  double throughput = 0.0;
  double compute = 0.0;
  double memory = 0.0;
  double delay = kUnboundedDelay;

  double get(Resource r) const;
  bool operator==(const AssignedVector&) const = default;
};

void validate(const DemandVector& r);
void validate(const AssignedVector& r);

/// Weights and cubic coefficients of the eMBB performance function.
struct EmbbShape {
  // Order: throughput, compute, memory, delay.
  std::array<double, 4> alpha{0.25, 0.25, 0.25, 0.25};
  std::array<double, 3> beta{1.5, 0.0, -0.5};

  double alpha_for(Resource r) const { return alpha[static_cast<std::size_t>(r)]; }
  /// Throws SliceError unless the weights are a convex combination and the
  /// cubic is monotone, concave and reaches 1 at x = 1.
  void validate() const;
  bool operator==(const EmbbShape&) const = default;
};

/// Fulfilment ratio for a resource: granted/requested, or requested/granted
/// for delay. An unbounded granted delay yields 0.
double fulfillment_ratio(Resource r, const DemandVector& demand, const AssignedVector& assigned);

class PerformanceModel {
 public:
  PerformanceModel() = default;
  explicit PerformanceModel(EmbbShape shape);

  const EmbbShape& shape() const { return shape_; }

  double f_embb(double x) const;
  static double f_urllc(double x);
  double f(SliceClass cls, double x) const {
    return cls == SliceClass::embb ? f_embb(x) : f_urllc(x);
  }

  double resource_score(SliceClass cls, Resource r, const DemandVector& demand,
                        const AssignedVector& assigned) const {
    return f(cls, fulfillment_ratio(r, demand, assigned));
  }

  double flow_performance(SliceClass cls, const DemandVector& demand,
                          const AssignedVector& assigned) const;

 private:
  EmbbShape shape_{};
};

struct FlowSample {
  SliceClass cls = SliceClass::embb;
  DemandVector demand;
  AssignedVector assigned;
};

/// Overall value plus per-class values; a class without flows is reported
/// as std::nullopt rather than 0.
struct Utility {
  double overall = 0.0;
  std::optional<double> embb;
  std::optional<double> urllc;

  std::optional<double> of(SliceClass cls) const { return cls == SliceClass::embb ? embb : urllc; }
};

Utility system_utility(const PerformanceModel& model, std::span<const FlowSample> flows);
Utility resource_utility(const PerformanceModel& model, std::span<const FlowSample> flows, Resource r);

}  // namespace nsorch
