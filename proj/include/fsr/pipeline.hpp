#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fsr/core.hpp"
#include "fsr/icnn.hpp"
#include "fsr/reducers.hpp"

namespace fsr {

// Rows each reducer is fitted on.
enum class FitSet { support_only, support_and_query };

// Rows the ICNN score is computed on. support_and_query_labels reads the
// query ground truth and is only meaningful as a diagnostic.
enum class ScoreSet { support_only, support_and_query_labels };

const char* to_string(FitSet v);
const char* to_string(ScoreSet v);
const char* to_string(OneShotRule v);
FitSet parse_fit_set(const std::string& s);
ScoreSet parse_score_set(const std::string& s);
OneShotRule parse_one_shot_rule(const std::string& s);

struct PipelineConfig {
  // Reducer templates; each is crossed with `dims` (its own target_dim is
  // ignored). Identity is always added as the first candidate.
  std::vector<ReducerSpec> pool = {ReducerSpec{.kind = ReducerKind::pca},
                                   ReducerSpec{.kind = ReducerKind::isomap}};
  std::vector<int> dims = {6};
  FitSet fit_set = FitSet::support_and_query;
  ScoreSet score_set = ScoreSet::support_only;
  IcnnParams icnn;                // icnn.k is used only when icnn_k is set
  std::optional<int> icnn_k;      // unset: shot (shot >= 2) or 3 (1-shot)
  int episodes = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// k = shot for shot >= 2, 3 for 1-shot, clamped to scoring_rows - 1. An
// explicit k is returned unchanged.
int resolve_icnn_k(std::optional<int> explicit_k, int shot, Eigen::Index scoring_rows);

struct ReducedCandidate {
  ReducerSpec spec;
  Matrix support_reduced;
  Matrix query_reduced;
  double score = 0.0;
  bool failed = false;
  std::string failure_reason;

  std::string name() const { return spec.name(); }
};

std::vector<ReducedCandidate> build_candidates(const Episode& episode,
                                               const PipelineConfig& config,
                                               std::uint64_t seed);

// Highest-scoring non-failed candidate; ties go to the earlier candidate, so
// identity (always first) wins any tie.
const ReducedCandidate& select_best(const std::vector<ReducedCandidate>& candidates);

// Row c is the mean of the support rows of class c.
Matrix prototypes(const Matrix& support, std::span<const ClassId> labels, int way);

// Nearest prototype by squared Euclidean distance; ties go to the smaller id.
std::vector<ClassId> classify(const Matrix& query, const Matrix& prototypes);

struct EpisodeResult {
  double accuracy = 0.0;
  std::string chosen;
  double chosen_score = 0.0;
  std::vector<std::string> failed_candidates;
};

EpisodeResult run_episode(const Episode& episode, const PipelineConfig& config,
                          std::uint64_t seed);

struct EpisodeRecord {
  int index = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string chosen;
  double chosen_score = 0.0;
};

struct Quartiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct EvalReport {
  std::vector<EpisodeRecord> episodes;
  double mean_pct = 0.0;
  double ci95_pct = 0.0;
  std::map<std::string, int> selection_histogram;
  std::map<std::string, int> failure_counts;
  Quartiles quartiles;
  bool uses_query_labels = false;

  std::vector<double> accuracies() const;
};

// Worker count used when 0 ("auto") is requested: hardware concurrency,
// capped by the FSR_MAX_WORKERS environment variable when set.
int resolve_workers(int requested);

// Runs config.episodes episodes; episode e samples with
// derive_seed(config.seed, e). The report does not depend on `workers`.
EvalReport evaluate(const EmbeddingStore& store, const EpisodeSpec& spec,
                    const PipelineConfig& config, int workers = 1);

struct ConfidenceInterval {
  double mean_pct = 0.0;
  double halfwidth_pct = 0.0;
};

// 95% normal-approximation interval of the mean, in percent.
ConfidenceInterval confidence_interval(std::span<const double> accuracies);

// "MM.MM ± H.HH"
std::string format_mean_ci(double mean_pct, double halfwidth_pct);

// Linearly interpolated quartiles.
Quartiles quartiles(std::span<const double> values);

void write_episode_csv(std::ostream& os, const EvalReport& report);
void write_episode_jsonl(std::ostream& os, const EvalReport& report);
void write_report_table(std::ostream& os, const EvalReport& report);

}  // namespace fsr
