#include <iostream>

#include <CLI11.hpp>

#include "nsorch/commands.hpp"

namespace {

void add_common(CLI::App* cmd, nsorch::Overrides& o) {
  cmd->add_option_function<std::string>("--config", [&o](const std::string& v) { o.config_path = v; },
                                        "Experiment config (JSON); defaults to the paper preset");
  cmd->add_option_function<std::uint64_t>("--seed", [&o](std::uint64_t v) { o.seed = v; }, "Master seed");
  cmd->add_option_function<std::size_t>("--episodes", [&o](std::size_t v) { o.episodes = v; },
                                        "Episode count for this command");
  cmd->add_option_function<std::size_t>("--workers", [&o](std::size_t v) { o.workers = v; },
                                        "Parallel episodes per update");
  cmd->add_option_function<std::string>("--topology", [&o](const std::string& v) { o.topology = v; },
                                        "Built-in name (dumbbell, triangle, pyramid, garr) or topology JSON path");
  cmd->add_option_function<std::string>("--checkpoint", [&o](const std::string& v) { o.checkpoint = v; },
                                        "Agent bundle to resume from, transfer from, or evaluate");
  cmd->add_option_function<std::string>("--out-dir", [&o](const std::string& v) { o.out_dir = v; },
                                        "Output directory");
  cmd->add_flag("--pyramid-plus", o.pyramid_plus, "Double the URLLC throughput range");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-slice resource allocation: training, transfer, evaluation and comparison"};
  app.require_subcommand(1);
  nsorch::Overrides o;

  auto* train = app.add_subcommand("train", "Train the shared per-slice agents");
  add_common(train, o);
  train->add_option("--start-episode", o.start_episode, "Index of the first training episode (resumed runs)");

  auto* eval = app.add_subcommand("eval", "Evaluate one strategy");
  add_common(eval, o);
  eval->add_option("--strategy", o.strategies, "drl[:<ckpt>], empirical, static:fit or static:file:<plan>")
      ->expected(1);

  auto* compare = app.add_subcommand("compare", "Paired evaluation of several strategies");
  add_common(compare, o);
  compare->add_option("--strategy", o.strategies, "Strategy selector (repeat for each strategy)");
  compare->add_flag("--sweep", o.sweep, "Also write mean per-class utility per flow count");

  auto* transfer = app.add_subcommand("transfer", "Specialise a checkpoint per network element");
  add_common(transfer, o);
  transfer->add_option("--start-episode", o.start_episode, "Index of the first fine-tuning episode");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return nsorch::cmd_train(o, std::cout, std::cerr);
  if (eval->parsed()) return nsorch::cmd_eval(o, std::cout, std::cerr);
  if (compare->parsed()) return nsorch::cmd_compare(o, std::cout, std::cerr);
  return nsorch::cmd_transfer(o, std::cout, std::cerr);
}
