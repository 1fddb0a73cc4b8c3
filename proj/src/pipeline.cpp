#include "fsr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include "fsr/errors.hpp"
#include "fsr/rng.hpp"

namespace fsr {

const char* to_string(FitSet v) {
  return v == FitSet::support_only ? "support_only" : "support_and_query";
}

const char* to_string(ScoreSet v) {
  return v == ScoreSet::support_only ? "support_only" : "support_and_query_labels";
}

const char* to_string(OneShotRule v) {
  return v == OneShotRule::drop_gamma ? "drop_gamma" : "zero_score";
}

FitSet parse_fit_set(const std::string& s) {
  if (s == "support_only") return FitSet::support_only;
  if (s == "support_and_query") return FitSet::support_and_query;
  throw ConfigError("unknown fit set '" + s + "' (support_only | support_and_query)");
}

ScoreSet parse_score_set(const std::string& s) {
  if (s == "support_only") return ScoreSet::support_only;
  if (s == "support_and_query_labels") return ScoreSet::support_and_query_labels;
  throw ConfigError("unknown score set '" + s + "' (support_only | support_and_query_labels)");
}

OneShotRule parse_one_shot_rule(const std::string& s) {
  if (s == "drop_gamma") return OneShotRule::drop_gamma;
  if (s == "zero_score") return OneShotRule::zero_score;
  throw ConfigError("unknown one-shot rule '" + s + "' (drop_gamma | zero_score)");
}

void PipelineConfig::validate() const {
  if (dims.empty()) throw ConfigError("pipeline: dims must not be empty");
  for (int d : dims) {
    if (d < 1) throw ConfigError("pipeline: dims must be positive");
  }
  if (episodes < 1) throw ConfigError("pipeline: episodes must be >= 1");
  if (icnn_k && *icnn_k < 1) throw ConfigError("pipeline: icnn k must be >= 1");
  IcnnParams probe = icnn;
  probe.k = 1;
  probe.validate();
  for (const auto& r : pool) {
    if (r.kind == ReducerKind::external && r.command.empty()) {
      throw ConfigError("pipeline: external reducer without a command");
    }
  }
}

int resolve_icnn_k(std::optional<int> explicit_k, int shot, Eigen::Index scoring_rows) {
  if (explicit_k) return *explicit_k;
  const int k = shot >= 2 ? shot : 3;
  return static_cast<int>(std::max<Eigen::Index>(1, std::min<Eigen::Index>(k, scoring_rows - 1)));
}

namespace {

void score_candidate(ReducedCandidate& c, const Episode& episode, const PipelineConfig& config) {
  IcnnParams params = config.icnn;
  if (config.score_set == ScoreSet::support_only) {
    params.k = resolve_icnn_k(config.icnn_k, episode.spec.shot, c.support_reduced.rows());
    c.score = icnn_score(c.support_reduced, episode.support.labels(), params);
    return;
  }
  const Eigen::Index ns = c.support_reduced.rows(), nq = c.query_reduced.rows();
  Matrix all(ns + nq, c.support_reduced.cols());
  all << c.support_reduced, c.query_reduced;
  std::vector<ClassId> labels = episode.support.labels();
  labels.insert(labels.end(), episode.query.labels().begin(), episode.query.labels().end());
  params.k = resolve_icnn_k(config.icnn_k, episode.spec.shot, all.rows());
  c.score = icnn_score(all, labels, params);
}

}  // namespace

std::vector<ReducedCandidate> build_candidates(const Episode& episode,
                                               const PipelineConfig& config,
                                               std::uint64_t seed) {
  std::vector<ReducerSpec> specs{ReducerSpec{.kind = ReducerKind::identity}};
  for (const auto& templ : config.pool) {
    if (templ.kind == ReducerKind::identity) continue;
    for (int dim : config.dims) {
      ReducerSpec s = templ;
      s.target_dim = dim;
      specs.push_back(std::move(s));
    }
  }

  const Matrix& support = episode.support.vectors();
  const Matrix& query = episode.query.vectors();
  Matrix joint;
  if (config.fit_set == FitSet::support_and_query) {
    joint.resize(support.rows() + query.rows(), support.cols());
    joint << support, query;
  }
  const FitContext ctx{episode.spec.shot};

  std::vector<ReducedCandidate> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ReducedCandidate c;
    c.spec = specs[i];
    const std::uint64_t cseed = derive_seed(seed, i);
    try {
      if (config.fit_set == FitSet::support_and_query) {
        const Matrix reduced = fit_transform(c.spec, joint, cseed, ctx).vectors;
        c.support_reduced = reduced.topRows(support.rows());
        c.query_reduced = reduced.bottomRows(query.rows());
      } else {
        auto split = fit_apply(c.spec, support, query, cseed, ctx);
        c.support_reduced = std::move(split.fitted);
        c.query_reduced = std::move(split.applied);
      }
      score_candidate(c, episode, config);
    } catch (const InternalError&) {
      throw;
    } catch (const std::exception& e) {
      if (c.spec.kind == ReducerKind::identity) throw;
      c.failed = true;
      c.failure_reason = e.what();
      c.score = 0.0;
      c.support_reduced.resize(0, 0);
      c.query_reduced.resize(0, 0);
    }
    out.push_back(std::move(c));
  }
  return out;
}

const ReducedCandidate& select_best(const std::vector<ReducedCandidate>& candidates) {
  const ReducedCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (c.failed) continue;
    if (best == nullptr || c.score > best->score) best = &c;
  }
  if (best == nullptr) throw InternalError("select_best: every candidate failed");
  return *best;
}

Matrix prototypes(const Matrix& support, std::span<const ClassId> labels, int way) {
  if (static_cast<Eigen::Index>(labels.size()) != support.rows()) {
    throw DataError("prototypes: label count does not match support rows");
  }
  Matrix proto = Matrix::Zero(way, support.cols());
  Vector counts = Vector::Zero(way);
  for (Eigen::Index r = 0; r < support.rows(); ++r) {
    const ClassId c = labels[static_cast<std::size_t>(r)];
    if (c < 0 || c >= way) throw DataError("prototypes: label out of range");
    proto.row(c) += support.row(r);
    counts(c) += 1.0;
  }
  for (int c = 0; c < way; ++c) {
    if (counts(c) == 0.0) {
      throw DataError("prototypes: class " + std::to_string(c) + " has no support rows");
    }
    proto.row(c) /= counts(c);
  }
  return proto;
}

std::vector<ClassId> classify(const Matrix& query, const Matrix& prototypes) {
  if (query.cols() != prototypes.cols()) {
    throw DataError("classify: query and prototype dimensions differ");
  }
  std::vector<ClassId> out(static_cast<std::size_t>(query.rows()));
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    ClassId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < prototypes.rows(); ++c) {
      const double d = (query.row(i) - prototypes.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<ClassId>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

EpisodeResult run_episode(const Episode& episode, const PipelineConfig& config,
                          std::uint64_t seed) {
  const auto candidates = build_candidates(episode, config, seed);
  const ReducedCandidate& best = select_best(candidates);
  const Matrix proto =
      prototypes(best.support_reduced, episode.support.labels(), episode.spec.way);
  const auto predicted = classify(best.query_reduced, proto);
  const auto& truth = episode.query.labels();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth[i];

  EpisodeResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
  result.chosen = best.name();
  result.chosen_score = best.score;
  for (const auto& c : candidates) {
    if (c.failed) result.failed_candidates.push_back(c.name() + ": " + c.failure_reason);
  }
  return result;
}

std::vector<double> EvalReport::accuracies() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.accuracy);
  return out;
}

int resolve_workers(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("FSR_MAX_WORKERS"); cap != nullptr && *cap != '\0') {
    const int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return std::max(n, 1);
}

EvalReport evaluate(const EmbeddingStore& store, const EpisodeSpec& spec,
                    const PipelineConfig& config, int workers) {
  spec.validate();
  config.validate();
  const int total = config.episodes;
  std::vector<EpisodeRecord> records(static_cast<std::size_t>(total));
  std::vector<std::vector<std::string>> failures(static_cast<std::size_t>(total));

  std::atomic<int> next{0};
  std::atomic<int> first_error{std::numeric_limits<int>::max()};
  std::mutex error_mutex;
  std::string error_message;

  auto worker = [&] {
    for (;;) {
      const int e = next.fetch_add(1);
      // Episodes past a known failure are skipped; everything before it still
      // runs, so the reported failure is always the lowest-index one.
      if (e >= total || e > first_error.load()) return;
      const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(e));
      try {
        const Episode episode = sample_episode(store, spec, seed);
        const EpisodeResult r = run_episode(episode, config, derive_seed(seed, 1));
        records[static_cast<std::size_t>(e)] = {e, seed, r.accuracy, r.chosen, r.chosen_score};
        failures[static_cast<std::size_t>(e)] = r.failed_candidates;
      } catch (const std::exception& ex) {
        std::lock_guard lock(error_mutex);
        if (e < first_error.load()) {
          first_error.store(e);
          error_message = "episode " + std::to_string(e) + " (seed " + std::to_string(seed) +
                          ") failed: " + ex.what();
        }
      }
    }
  };

  const int n_workers = std::min(resolve_workers(workers), total);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (first_error.load() != std::numeric_limits<int>::max()) throw DataError(error_message);

  EvalReport report;
  report.episodes = std::move(records);
  report.uses_query_labels = config.score_set == ScoreSet::support_and_query_labels;
  for (std::size_t e = 0; e < report.episodes.size(); ++e) {
    ++report.selection_histogram[report.episodes[e].chosen];
    for (const auto& f : failures[e]) ++report.failure_counts[f.substr(0, f.find(':'))];
  }
  const auto acc = report.accuracies();
  const auto ci = confidence_interval(acc);
  report.mean_pct = ci.mean_pct;
  report.ci95_pct = ci.halfwidth_pct;
  report.quartiles = quartiles(acc);
  return report;
}

}  // namespace fsr
