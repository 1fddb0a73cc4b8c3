#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "fsr/errors.hpp"
#include "fsr/pipeline.hpp"

namespace fsr {

ConfidenceInterval confidence_interval(std::span<const double> accuracies) {
  if (accuracies.empty()) throw DataError("confidence interval: no values");
  const auto n = static_cast<double>(accuracies.size());
  // Shifting by the first value keeps constant input exact (zero spread).
  const double shift = accuracies.front();
  double offset = 0.0;
  for (double a : accuracies) offset += a - shift;
  offset /= n;
  const double mean = shift + offset;
  ConfidenceInterval ci{100.0 * mean, 0.0};
  if (accuracies.size() < 2) return ci;
  double ss = 0.0;
  for (double a : accuracies) ss += (a - shift - offset) * (a - shift - offset);
  const double sd = std::sqrt(ss / (n - 1.0));
  ci.halfwidth_pct = 100.0 * 1.96 * sd / std::sqrt(n);
  return ci;
}

std::string format_mean_ci(double mean_pct, double halfwidth_pct) {
  return fmt::format("{:.2f} ± {:.2f}", mean_pct, halfwidth_pct);
}

Quartiles quartiles(std::span<const double> values) {
  if (values.empty()) throw DataError("quartiles: no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

void write_episode_csv(std::ostream& os, const EvalReport& report) {
  os << "index,seed,accuracy,chosen,score\n";
  for (const auto& e : report.episodes) {
    os << fmt::format("{},{},{:.17g},{},{:.17g}\n", e.index, e.seed, e.accuracy, e.chosen,
                      e.chosen_score);
  }
}

void write_episode_jsonl(std::ostream& os, const EvalReport& report) {
  for (const auto& e : report.episodes) {
    nlohmann::ordered_json j;
    j["index"] = e.index;
    j["seed"] = e.seed;
    j["accuracy"] = e.accuracy;
    j["chosen"] = e.chosen;
    j["score"] = e.chosen_score;
    os << j.dump() << '\n';
  }
}

void write_report_table(std::ostream& os, const EvalReport& report) {
  const auto& q = report.quartiles;
  os << fmt::format("episodes   {}\n", report.episodes.size());
  os << fmt::format("accuracy   {} %\n", format_mean_ci(report.mean_pct, report.ci95_pct));
  os << fmt::format("quartiles  min {:.4f}  q1 {:.4f}  median {:.4f}  q3 {:.4f}  max {:.4f}\n",
                    q.min, q.q1, q.median, q.q3, q.max);
  os << "selected reducers\n";
  std::vector<std::pair<std::string, int>> rows(report.selection_histogram.begin(),
                                                report.selection_histogram.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [name, count] : rows) {
    os << fmt::format("  {:<28} {:>6}  ({:.1f} %)\n", name, count,
                      100.0 * count / static_cast<double>(report.episodes.size()));
  }
  if (!report.failure_counts.empty()) {
    os << "failed candidates\n";
    for (const auto& [name, count] : report.failure_counts) {
      os << fmt::format("  {:<28} {:>6}\n", name, count);
    }
  }
  if (report.uses_query_labels) {
    os << "WARNING: scores used query ground-truth labels (diagnostic mode, not a valid "
          "inference result)\n";
  }
}

}  // namespace fsr
