#include "nsorch/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace nsorch {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

const std::vector<std::string> kCurveColumns{"episode",          "omega",           "omega_e",
                                             "omega_u",          "mean_reward_rate_e", "mean_reward_rate_u",
                                             "mean_reward_c_e",  "mean_reward_c_u", "mean_reward_m_e",
                                             "mean_reward_m_u"};

const std::vector<std::string> kEvalColumns{"episode", "n_flows",   "omega",   "omega_e",    "omega_u",
                                            "omega_eta", "omega_c", "omega_m", "omega_delta"};

namespace {

void header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void eval_fields(std::ostream& out, const EvalRow& r) {
  out << r.n_flows << ',' << format_real(r.omega) << ',' << format_real(r.omega_e) << ','
      << format_real(r.omega_u) << ',' << format_real(r.omega_eta) << ',' << format_real(r.omega_c) << ','
      << format_real(r.omega_m) << ',' << format_real(r.omega_delta);
}

void check_paired(std::span<const StrategyRows> runs) {
  if (runs.empty()) throw std::invalid_argument("no strategies to compare");
  for (const auto& r : runs) {
    if (r.rows.size() != runs.front().rows.size()) throw std::invalid_argument("strategies cover different episodes");
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      if (r.rows[i].episode != runs.front().rows[i].episode || r.rows[i].n_flows != runs.front().rows[i].n_flows) {
        throw std::invalid_argument("strategy '" + r.name + "' is not paired with '" + runs.front().name + "'");
      }
    }
  }
}

}  // namespace

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  header(out, kCurveColumns);
  for (const auto& r : rows) {
    out << r.episode << ',' << format_real(r.omega) << ',' << format_real(r.omega_e) << ','
        << format_real(r.omega_u);
    for (const auto& m : r.mean_reward) out << ',' << format_real(m);
    out << '\n';
  }
}

void write_smoothed_curve_csv(std::ostream& out, std::span<const CurveRow> rows, std::size_t window) {
  header(out, {"episode", "window", "omega_smooth", "omega_e_smooth", "omega_u_smooth"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    double se = 0.0;
    double su = 0.0;
    std::size_t ne = 0;
    std::size_t nu = 0;
    for (std::size_t k = lo; k <= i; ++k) {
      s += rows[k].omega;
      if (rows[k].omega_e) {
        se += *rows[k].omega_e;
        ++ne;
      }
      if (rows[k].omega_u) {
        su += *rows[k].omega_u;
        ++nu;
      }
    }
    const std::size_t n = i - lo + 1;
    out << rows[i].episode << ',' << n << ',' << format_real(s / static_cast<double>(n)) << ','
        << (ne ? format_real(se / static_cast<double>(ne)) : "") << ','
        << (nu ? format_real(su / static_cast<double>(nu)) : "") << '\n';
  }
}

void write_eval_csv(std::ostream& out, std::span<const EvalRow> rows) {
  header(out, kEvalColumns);
  for (const auto& r : rows) {
    out << r.episode << ',';
    eval_fields(out, r);
    out << '\n';
  }
}

std::string summary_json(const std::map<std::string, std::optional<Summary>>& summaries) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& m : kEvalMetrics) {
    auto it = summaries.find(m);
    if (it == summaries.end() || !it->second) {
      j[m] = nullptr;
      continue;
    }
    const Summary& s = *it->second;
    j[m] = {{"median", s.median}, {"p25", s.p25}, {"p75", s.p75}, {"mean", s.mean}, {"count", s.count}};
  }
  return j.dump(2) + "\n";
}

void write_paired_csv(std::ostream& out, std::span<const StrategyRows> runs) {
  check_paired(runs);
  std::vector<std::string> cols{"episode", "strategy"};
  cols.insert(cols.end(), kEvalColumns.begin() + 1, kEvalColumns.end());
  header(out, cols);
  for (std::size_t i = 0; i < runs.front().rows.size(); ++i) {
    for (const auto& r : runs) {
      out << r.rows[i].episode << ',' << r.name << ',';
      eval_fields(out, r.rows[i]);
      out << '\n';
    }
  }
}

void write_boxplot_csv(std::ostream& out, std::span<const StrategyRows> runs) {
  header(out, {"strategy", "metric", "count", "whisker_low", "p25", "median", "p75", "whisker_high", "mean"});
  for (const auto& r : runs) {
    for (const auto& m : kEvalMetrics) {
      auto v = metric_values(r.rows, m);
      out << r.name << ',' << m << ',' << v.size();
      if (v.empty()) {
        out << ",,,,,,\n";
        continue;
      }
      std::sort(v.begin(), v.end());
      const auto s = *summarize(v);
      const double iqr = s.p75 - s.p25;
      const double lo_fence = s.p25 - 1.5 * iqr;
      const double hi_fence = s.p75 + 1.5 * iqr;
      // Whiskers end at the most extreme samples inside the fences.
      const double lo = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= lo_fence; });
      const double hi = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= hi_fence; });
      out << ',' << format_real(lo) << ',' << format_real(s.p25) << ',' << format_real(s.median) << ','
          << format_real(s.p75) << ',' << format_real(hi) << ',' << format_real(s.mean) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, std::span<const StrategyRows> runs) {
  header(out, {"strategy", "n_flows", "episodes", "mean_omega", "mean_omega_e", "mean_omega_u"});
  for (const auto& r : runs) {
    std::map<std::size_t, std::vector<EvalRow>> by_count;
    for (const auto& row : r.rows) by_count[row.n_flows].push_back(row);
    for (const auto& [n, rows] : by_count) {
      auto mean = [](const std::vector<double>& v) -> std::optional<double> {
        if (v.empty()) return std::nullopt;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      out << r.name << ',' << n << ',' << rows.size() << ',' << format_real(mean(metric_values(rows, "omega")))
          << ',' << format_real(mean(metric_values(rows, "omega_e"))) << ','
          << format_real(mean(metric_values(rows, "omega_u"))) << '\n';
    }
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace nsorch
