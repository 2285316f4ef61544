#pragma once

#include <iosfwd>
#include <string>

#include "nsorch/drl/agent.hpp"

namespace nsorch::drl {

/// Versioned little-endian binary image of a bundle: observation settings,
/// then every agent with its layer sizes, parameters, log_std and both Adam
/// states. Reals are stored as raw IEEE-754 doubles so a round trip is exact.
void write_bundle(std::ostream& out, const AgentBundle& bundle);
AgentBundle read_bundle(std::istream& in);

void save_bundle(const std::string& path, const AgentBundle& bundle);
AgentBundle load_bundle(const std::string& path);

}  // namespace nsorch::drl
