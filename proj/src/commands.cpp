#include "nsorch/commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nsorch/drl/checkpoint.hpp"
#include "nsorch/drl/drl_strategy.hpp"
#include "nsorch/ga.hpp"
#include "nsorch/report.hpp"

namespace nsorch {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || (s.size() > 5 && s.ends_with(".json"));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string path_in(const ExperimentConfig& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void prepare_out_dir(const ExperimentConfig& c, const std::string& command, const std::vector<std::string>& files) {
  fs::create_directories(c.out_dir);
  write_text_file(path_in(c, "effective_config.json"), dump_config(c));
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["created_utc"] = utc_timestamp();
  meta["seed"] = c.seed;
  meta["files"] = files;
  write_text_file(path_in(c, "metadata.json"), meta.dump(2) + "\n");
}

template <typename F>
void write_stream_file(const std::string& path, F&& f) {
  std::ostringstream ss;
  f(ss);
  write_text_file(path, ss.str());
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

drl::AgentBundle fresh_bundle(const ExperimentConfig& c) {
  return drl::make_generalist_bundle(c.observation, c.network, c.rl.lr_actor, c.rl.lr_critic, c.rl.initial_log_std,
                                     derive_seed(c.seed, 0xB0D1E));
}

std::vector<EvalRow> run_eval(const ExperimentConfig& c, const Scenario& scn, const AllocationStrategy& s,
                              std::vector<std::optional<StaticPlanEntry>>* plans = nullptr) {
  EpisodeHook hook;
  if (plans != nullptr) {
    plans->assign(c.runs.eval_episodes, std::nullopt);
    hook = [plans](std::size_t i, const AllocationStrategy& played) {
      if (const auto* st = dynamic_cast<const StaticStrategy*>(&played)) (*plans)[i] = st->last_plan_entry();
    };
  }
  return evaluate(scn, s, 0, c.runs.eval_episodes, eval_seed(c), Execution::parallel, hook);
}

}  // namespace

ExperimentConfig resolve_config(const std::string& command, const Overrides& o) {
  ExperimentConfig c = o.config_path ? load_config(*o.config_path) : paper_preset();
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.runs.workers = *o.workers;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.pyramid_plus) c.pyramid_plus = true;
  if (o.topology) {
    if (looks_like_path(*o.topology)) {
      c.topology.file = *o.topology;
    } else {
      c.topology.file.clear();
      c.topology.builtin = *o.topology;
    }
  }
  if (!o.strategies.empty()) c.strategies = o.strategies;
  if (o.episodes) {
    if (command == "train") c.runs.train_episodes = *o.episodes;
    else if (command == "transfer") c.runs.transfer_episodes = *o.episodes;
    else c.runs.eval_episodes = *o.episodes;
  }
  validate(c);
  return c;
}

std::unique_ptr<AllocationStrategy> make_strategy(const std::string& selector, const ExperimentConfig& config,
                                                  const std::optional<std::string>& default_checkpoint) {
  if (selector == "empirical") return std::make_unique<EmpiricalStrategy>();
  if (selector == "static:fit") return std::make_unique<StaticStrategy>(config.ga);
  if (selector.starts_with("static:file:")) {
    const auto plan = std::make_shared<const StaticPlan>(StaticPlan::load(selector.substr(12)));
    return std::make_unique<StaticStrategy>(plan);
  }
  if (selector == "drl" || selector.starts_with("drl:")) {
    std::string path = selector.size() > 4 ? selector.substr(4) : std::string();
    if (path.empty()) {
      if (!default_checkpoint) throw std::invalid_argument("strategy 'drl' needs a checkpoint (drl:<path> or --checkpoint)");
      path = *default_checkpoint;
    }
    auto bundle = std::make_shared<const drl::AgentBundle>(drl::load_bundle(path));
    return std::make_unique<drl::DrlStrategy>(bundle, config.rl, config.eval_sample_actions, false);
  }
  throw std::invalid_argument("unknown strategy selector '" + selector +
                              "' (expected drl[:<ckpt>], empirical, static:fit or static:file:<path>)");
}

int cmd_train(const Overrides& o, std::ostream& log, std::ostream& err) {
  return run_guarded(err, [&] {
    const ExperimentConfig c = resolve_config("train", o);
    const Scenario scn = make_scenario(c);
    drl::AgentBundle bundle = o.checkpoint ? drl::load_bundle(*o.checkpoint) : fresh_bundle(c);
    prepare_out_dir(c, "train", {"learning_curve.csv", "learning_curve_smoothed.csv", "checkpoint.bin",
                                 "train_summary.json"});
    fs::create_directories(path_in(c, "checkpoints"));

    TrainConfig tc;
    tc.episodes = c.runs.train_episodes;
    tc.workers = c.runs.workers;
    tc.checkpoint_every = c.runs.checkpoint_every;
    tc.first_episode = o.start_episode;
    tc.seed = train_seed(c);
    tc.rl = c.rl;
    std::vector<CurveRow> curve;
    const auto stats = train(scn, bundle, tc, curve, Execution::parallel, [&](std::size_t done, const auto& b) {
      const auto p = path_in(c, "checkpoints/episode_" + std::to_string(o.start_episode + done) + ".bin");
      drl::save_bundle(p, b);
      log << "checkpoint " << p << '\n';
    });
    drl::save_bundle(path_in(c, "checkpoint.bin"), bundle);
    write_stream_file(path_in(c, "learning_curve.csv"), [&](std::ostream& s) { write_curve_csv(s, curve); });
    write_stream_file(path_in(c, "learning_curve_smoothed.csv"),
                      [&](std::ostream& s) { write_smoothed_curve_csv(s, curve); });
    nlohmann::ordered_json j{{"episodes", stats.episodes},
                             {"updates", stats.updates},
                             {"skipped_updates", stats.skipped_updates}};
    write_text_file(path_in(c, "train_summary.json"), j.dump(2) + "\n");
    log << "trained " << stats.episodes << " episodes (" << stats.updates << " updates, " << stats.skipped_updates
        << " skipped); outputs in " << c.out_dir << '\n';
    return 0;
  });
}

int cmd_eval(const Overrides& o, std::ostream& log, std::ostream& err) {
  return run_guarded(err, [&] {
    const ExperimentConfig c = resolve_config("eval", o);
    if (c.strategies.size() != 1) throw std::invalid_argument("eval needs exactly one --strategy");
    const std::string selector = c.strategies.front();
    const Scenario scn = make_scenario(c);
    const auto strategy = make_strategy(selector, c, o.checkpoint);
    const bool fit = selector == "static:fit";
    std::vector<std::string> files{"eval.csv", "summary.json"};
    if (fit) files.push_back("static_plan.json");
    prepare_out_dir(c, "eval", files);

    std::vector<std::optional<StaticPlanEntry>> plans;
    const auto rows = run_eval(c, scn, *strategy, fit ? &plans : nullptr);
    write_stream_file(path_in(c, "eval.csv"), [&](std::ostream& s) { write_eval_csv(s, rows); });
    write_text_file(path_in(c, "summary.json"), summary_json(summarize_rows(rows)));
    if (fit) {
      StaticPlan plan;
      for (auto& p : plans) plan.entries.push_back(std::move(*p));
      write_text_file(path_in(c, "static_plan.json"), plan.dump());
    }
    const auto s = summarize_rows(rows).at("omega");
    log << selector << ": " << rows.size() << " episodes, median omega " << format_real(s->median) << '\n';
    return 0;
  });
}

int cmd_compare(const Overrides& o, std::ostream& log, std::ostream& err) {
  return run_guarded(err, [&] {
    const ExperimentConfig c = resolve_config("compare", o);
    if (c.strategies.size() < 2) throw std::invalid_argument("compare needs at least two strategies");
    const Scenario scn = make_scenario(c);
    std::vector<std::unique_ptr<AllocationStrategy>> strategies;
    for (const auto& sel : c.strategies) strategies.push_back(make_strategy(sel, c, o.checkpoint));
    std::vector<std::string> files{"paired.csv", "boxplot.csv", "summary.json"};
    if (o.sweep) files.push_back("sweep.csv");
    prepare_out_dir(c, "compare", files);

    std::vector<StrategyRows> runs;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
      runs.push_back({c.strategies[i], run_eval(c, scn, *strategies[i])});
      summary[c.strategies[i]] = nlohmann::ordered_json::parse(summary_json(summarize_rows(runs.back().rows)));
      log << c.strategies[i] << ": median omega "
          << format_real(summarize_rows(runs.back().rows).at("omega")->median) << '\n';
    }
    write_stream_file(path_in(c, "paired.csv"), [&](std::ostream& s) { write_paired_csv(s, runs); });
    write_stream_file(path_in(c, "boxplot.csv"), [&](std::ostream& s) { write_boxplot_csv(s, runs); });
    if (o.sweep) write_stream_file(path_in(c, "sweep.csv"), [&](std::ostream& s) { write_sweep_csv(s, runs); });
    write_text_file(path_in(c, "summary.json"), summary.dump(2) + "\n");
    return 0;
  });
}

int cmd_transfer(const Overrides& o, std::ostream& log, std::ostream& err) {
  return run_guarded(err, [&] {
    if (!o.checkpoint) throw std::invalid_argument("transfer needs --checkpoint <source bundle>");
    const ExperimentConfig c = resolve_config("transfer", o);
    const Scenario scn = make_scenario(c);
    const drl::AgentBundle source = drl::load_bundle(*o.checkpoint);
    prepare_out_dir(c, "transfer", {"learning_curve.csv", "learning_curve_smoothed.csv", "checkpoint.bin"});

    TrainConfig tc;
    tc.episodes = c.runs.transfer_episodes;
    tc.workers = c.runs.workers;
    tc.first_episode = o.start_episode;
    tc.seed = transfer_seed(c);
    tc.rl = c.rl;
    std::vector<CurveRow> curve;
    const drl::AgentBundle out = transfer(scn, source, tc, curve);
    drl::save_bundle(path_in(c, "checkpoint.bin"), out);
    write_stream_file(path_in(c, "learning_curve.csv"), [&](std::ostream& s) { write_curve_csv(s, curve); });
    write_stream_file(path_in(c, "learning_curve_smoothed.csv"),
                      [&](std::ostream& s) { write_smoothed_curve_csv(s, curve); });
    log << "specialised " << out.agents.size() << " agents over " << tc.episodes << " episodes; outputs in "
        << c.out_dir << '\n';
    return 0;
  });
}

}  // namespace nsorch
