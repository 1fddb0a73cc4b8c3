#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsr/core.hpp"
#include "fsr/pipeline.hpp"

namespace fsr {

// Axes of a design-choice grid. An empty axis keeps the base config value.
struct SweepGrid {
  std::vector<std::optional<int>> k;  // nullopt = auto
  std::vector<double> p, q, r;
  std::vector<std::vector<int>> dims;
  std::vector<FitSet> fit_set;
  std::vector<std::vector<ReducerSpec>> pool;
};

struct RunConfig {
  std::filesystem::path store_path;
  EpisodeSpec episode;
  PipelineConfig pipeline;
  int workers = 0;  // 0 = auto
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> jsonl_path;
  SweepGrid sweep;

  // Store must exist; output directories must exist.
  void check_paths() const;  // throws ConfigError
};

// Merges a JSON document into `config`. Unknown keys are rejected. Relative
// paths are resolved against `base_dir`. Throws ConfigError.
void apply_config_json(RunConfig& config, const nlohmann::json& doc,
                       const std::filesystem::path& base_dir = {});

RunConfig load_run_config(const std::filesystem::path& path);

// Pool entry from a JSON string ("isomap:n_neighbors=8") or object
// ({"kind": "isomap", "n_neighbors": 8}).
ReducerSpec reducer_from_json(const nlohmann::json& j);

std::vector<int> parse_int_list(const std::string& text);      // "6,8,10"
std::vector<double> parse_double_list(const std::string& text);

struct SweepRow {
  std::string label;
  PipelineConfig config;
  double mean_pct = 0.0;
  double ci95_pct = 0.0;
  std::string top_reducer;
};

// Expands the grid (k, p, q, r, dims, fit_set, pool; last axis fastest).
std::vector<std::pair<std::string, PipelineConfig>> expand_sweep(const RunConfig& config);

std::vector<SweepRow> run_sweep(const EmbeddingStore& store, const RunConfig& config);

}  // namespace fsr
