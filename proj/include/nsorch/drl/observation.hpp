#pragma once

#include <array>
#include <span>
#include <vector>

#include "nsorch/fluidnet.hpp"
#include "nsorch/strategies.hpp"
#include "nsorch/topology.hpp"

namespace nsorch::drl {

/// Normalisation constants and the subset of flow features fed to rate
/// agents. Node agents always see the requested and granted amounts of
/// their own resource.
struct ObservationConfig {
  double rate_scale = 50e9;    // bps; also used for compute
  double memory_scale = 60e9;  // bits
  double clip = 10.0;
  // Indices into the flow part [eta, c, m, delta, eta^, c^, m^, delta^].
  std::vector<std::size_t> rate_flow_features{0, 3, 4, 7};

  std::size_t rate_input_size() const { return rate_flow_features.size() + 7; }
  std::size_t node_input_size() const { return 2 + 5; }
  std::size_t input_size(AllocationKind kind) const {
    return kind == AllocationKind::rate ? rate_input_size() : node_input_size();
  }
  void validate() const;
  bool operator==(const ObservationConfig&) const = default;
};

/// Slot-start state seen by every controller.
struct ObservationContext {
  const Topology* topology = nullptr;
  const FlowLayout* layout = nullptr;
  std::span<const DemandVector> demands;  // current requirements
  const SlotOutcome* previous = nullptr;  // initial_outcome() at episode start
  double slot_s = 0.1;
};

// Unnormalised parts, in base units.

/// [eta, c, m, delta] requested now, then the granted values of last slot.
std::array<double, 8> raw_flow_features(const ObservationContext& ctx, std::size_t flow);

/// [B_l, tau_{l,flow}, D_{l,flow}, b*_{l,flow}, b_{l,flow}, b_l^e, b_l^u],
/// all but the capacity taken from last slot; the class aggregates are sums
/// of demanded rates.
std::array<double, 7> raw_link_features(const ObservationContext& ctx, std::size_t flow, std::size_t position);

/// [C_n, rho*_{n,flow}, rho_{n,flow}, rho_n^e, rho_n^u] for compute or memory.
std::array<double, 5> raw_node_features(const ObservationContext& ctx, std::size_t flow, std::size_t position,
                                        AllocationKind kind);

/// Normalised input of the rate agent for the link at route `position`.
std::vector<double> link_observation(const ObservationContext& ctx, const ObservationConfig& cfg,
                                     std::size_t flow, std::size_t position);

/// Normalised input of the compute or memory agent for the node at route
/// `position`.
std::vector<double> node_observation(const ObservationContext& ctx, const ObservationConfig& cfg,
                                     std::size_t flow, std::size_t position, AllocationKind kind);

}  // namespace nsorch::drl
