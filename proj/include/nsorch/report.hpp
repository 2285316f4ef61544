#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsorch/orchestrator.hpp"

namespace nsorch {

/// Shortest text that parses back to the same double; "" for an absent value.
std::string format_real(double v);
std::string format_real(const std::optional<double>& v);

extern const std::vector<std::string> kCurveColumns;
extern const std::vector<std::string> kEvalColumns;

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);
/// Trailing-window means of omega, omega_e and omega_u.
void write_smoothed_curve_csv(std::ostream& out, std::span<const CurveRow> rows, std::size_t window = 100);
void write_eval_csv(std::ostream& out, std::span<const EvalRow> rows);

/// JSON object: metric -> {median, p25, p75, mean, count} or null.
std::string summary_json(const std::map<std::string, std::optional<Summary>>& summaries);

struct StrategyRows {
  std::string name;
  std::vector<EvalRow> rows;
};

/// One row per (episode, strategy); all strategies must cover the same
/// episodes with the same flow counts.
void write_paired_csv(std::ostream& out, std::span<const StrategyRows> runs);

/// Median, quartiles and 1.5 IQR whiskers per (strategy, metric).
void write_boxplot_csv(std::ostream& out, std::span<const StrategyRows> runs);

/// Mean omega_e and omega_u per (strategy, flow count).
void write_sweep_csv(std::ostream& out, std::span<const StrategyRows> runs);

/// Writes `text` to `path`, throwing std::runtime_error with the path on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nsorch
