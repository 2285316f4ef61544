#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsorch/config.hpp"
#include "nsorch/strategies.hpp"

namespace nsorch {

/// Command-line overrides applied on top of the loaded configuration.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;  // episode count of the command being run
  std::optional<std::size_t> workers;
  std::optional<std::string> topology;  // built-in name, or a path to a topology JSON file
  std::vector<std::string> strategies;
  std::optional<std::string> checkpoint;
  std::optional<std::string> out_dir;
  bool pyramid_plus = false;
  std::size_t start_episode = 0;  // first training episode index, for resumed runs
  bool sweep = false;             // compare: also emit the per-flow-count table
};

/// Loads the config (or the paper preset) and applies `o`. `episodes` is
/// routed to the field matching `command`.
ExperimentConfig resolve_config(const std::string& command, const Overrides& o);

/// drl[:<checkpoint>], empirical, static:fit, static:file:<plan>. A bare
/// "drl" uses `default_checkpoint`.
std::unique_ptr<AllocationStrategy> make_strategy(const std::string& selector, const ExperimentConfig& config,
                                                  const std::optional<std::string>& default_checkpoint);

// Each returns a process exit status and reports errors on `err`.
int cmd_train(const Overrides& o, std::ostream& log, std::ostream& err);
int cmd_eval(const Overrides& o, std::ostream& log, std::ostream& err);
int cmd_compare(const Overrides& o, std::ostream& log, std::ostream& err);
int cmd_transfer(const Overrides& o, std::ostream& log, std::ostream& err);

}  // namespace nsorch
