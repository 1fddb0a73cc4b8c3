// fsr: per-task dimensionality-reduction selection for few-shot evaluation.
//
//   fsr eval   --config run.json [overrides]   episodic evaluation
//   fsr score  FILE [--k 5] [--verbose]        ICNN score of one labeled file
//   fsr reduce FILE --reducer pca --dim 6 --out OUT
//   fsr synth  --out store.fse [--classes 20 ...]
//   fsr sweep  --config run.json [grid flags]  design-choice grid
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fsr/config.hpp"
#include "fsr/errors.hpp"
#include "fsr/icnn.hpp"
#include "fsr/pipeline.hpp"
#include "fsr/reducers.hpp"
#include "fsr/store_io.hpp"
#include "fsr/synth.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Flag overrides shared by `eval` and `sweep`; applied on top of the config
// file, which is applied on top of the defaults.
struct Overrides {
  std::string config;
  std::string store;
  std::optional<int> way, shot, queries, episodes, workers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> pool;
  std::string dims, fit_set, score_set, one_shot_rule, k;
  std::optional<double> p, q, r, degenerate;
  std::string csv, jsonl;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--store", store, "embedding store (CSV or binary)");
    app->add_option("--way", way, "classes per episode");
    app->add_option("--shot", shot, "support vectors per class");
    app->add_option("--queries", queries, "query vectors per class");
    app->add_option("--episodes", episodes, "number of episodes");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--workers", workers, "worker threads (0 = auto)");
    app->add_option("--pool", pool,
                    "reducer template, repeatable (e.g. pca, isomap:n_neighbors=8, "
                    "external:name=umap:command=...); 'none' = identity only");
    app->add_option("--dims", dims, "comma-separated target dimensions");
    app->add_option("--fit-set", fit_set, "support_only | support_and_query");
    app->add_option("--score-set", score_set, "support_only | support_and_query_labels");
    app->add_option("--k", k, "ICNN neighbor count or 'auto'");
    app->add_option("--p", p, "ICNN lambda exponent");
    app->add_option("--q", q, "ICNN omega exponent");
    app->add_option("--r", r, "ICNN gamma exponent");
    app->add_option("--one-shot-rule", one_shot_rule, "drop_gamma | zero_score");
    app->add_option("--degenerate-spread", degenerate, "normalized distance when all neighbors tie");
    app->add_option("--csv", csv, "per-episode CSV output");
    app->add_option("--jsonl", jsonl, "per-episode JSON-lines output");
  }

  fsr::RunConfig build() const {
    fsr::RunConfig cfg = config.empty() ? fsr::RunConfig{} : fsr::load_run_config(config);
    auto& pipe = cfg.pipeline;
    if (!store.empty()) cfg.store_path = store;
    if (way) cfg.episode.way = *way;
    if (shot) cfg.episode.shot = *shot;
    if (queries) cfg.episode.queries_per_class = *queries;
    if (episodes) pipe.episodes = *episodes;
    if (seed) pipe.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!pool.empty()) {
      pipe.pool.clear();
      for (const auto& s : pool) {
        if (s != "none") pipe.pool.push_back(fsr::parse_reducer_spec(s));
      }
    }
    if (!dims.empty()) pipe.dims = fsr::parse_int_list(dims);
    if (!fit_set.empty()) pipe.fit_set = fsr::parse_fit_set(fit_set);
    if (!score_set.empty()) pipe.score_set = fsr::parse_score_set(score_set);
    if (!k.empty()) {
      pipe.icnn_k = k == "auto" ? std::nullopt : std::optional<int>(fsr::parse_int_list(k).at(0));
    }
    if (p) pipe.icnn.p = *p;
    if (q) pipe.icnn.q = *q;
    if (r) pipe.icnn.r = *r;
    if (!one_shot_rule.empty()) pipe.icnn.one_shot_rule = fsr::parse_one_shot_rule(one_shot_rule);
    if (degenerate) pipe.icnn.degenerate_spread_value = *degenerate;
    if (!csv.empty()) cfg.csv_path = csv;
    if (!jsonl.empty()) cfg.jsonl_path = jsonl;
    cfg.episode.validate();
    pipe.validate();
    cfg.check_paths();
    return cfg;
  }
};

void write_file(const std::filesystem::path& path, auto&& writer) {
  std::ofstream os(path);
  if (!os) throw fsr::DataError("cannot write '" + path.string() + "'");
  writer(os);
}

int run_eval(const Overrides& ov) {
  const fsr::RunConfig cfg = ov.build();
  const fsr::EmbeddingStore store = fsr::load_store(cfg.store_path);
  const fsr::EvalReport report = fsr::evaluate(store, cfg.episode, cfg.pipeline, cfg.workers);
  std::cout << fmt::format("{}-way {}-shot, {} queries/class, store {}\n", cfg.episode.way,
                           cfg.episode.shot, cfg.episode.queries_per_class,
                           cfg.store_path.string());
  fsr::write_report_table(std::cout, report);
  if (cfg.csv_path) {
    write_file(*cfg.csv_path, [&](std::ostream& os) { fsr::write_episode_csv(os, report); });
  }
  if (cfg.jsonl_path) {
    write_file(*cfg.jsonl_path, [&](std::ostream& os) { fsr::write_episode_jsonl(os, report); });
  }
  return kOk;
}

struct SweepFlags {
  std::string k, p, q, r, fit_sets, summary_csv;
  std::vector<std::string> dims, pools;

  void attach(CLI::App* app) {
    app->add_option("--grid-k", k, "comma-separated k values ('auto' allowed)");
    app->add_option("--grid-p", p, "comma-separated p values");
    app->add_option("--grid-q", q, "comma-separated q values");
    app->add_option("--grid-r", r, "comma-separated r values");
    app->add_option("--grid-dims", dims, "dims list per grid point, repeatable (e.g. 6 or 32,16,8)");
    app->add_option("--grid-fit-set", fit_sets, "comma-separated fit sets");
    app->add_option("--grid-pool", pools,
                    "pool per grid point, repeatable; entries joined by '+' (e.g. pca+isomap)");
    app->add_option("--summary-csv", summary_csv, "write the grid results as CSV");
  }

  void apply(fsr::SweepGrid& g) const {
    if (!k.empty()) {
      g.k.clear();
      std::stringstream ss(k);
      std::string item;
      while (std::getline(ss, item, ',')) {
        g.k.push_back(item == "auto" ? std::nullopt
                                     : std::optional<int>(fsr::parse_int_list(item).at(0)));
      }
    }
    if (!p.empty()) g.p = fsr::parse_double_list(p);
    if (!q.empty()) g.q = fsr::parse_double_list(q);
    if (!r.empty()) g.r = fsr::parse_double_list(r);
    if (!dims.empty()) {
      g.dims.clear();
      for (const auto& d : dims) g.dims.push_back(fsr::parse_int_list(d));
    }
    if (!fit_sets.empty()) {
      g.fit_set.clear();
      std::stringstream ss(fit_sets);
      std::string item;
      while (std::getline(ss, item, ',')) g.fit_set.push_back(fsr::parse_fit_set(item));
    }
    if (!pools.empty()) {
      g.pool.clear();
      for (const auto& text : pools) {
        std::vector<fsr::ReducerSpec> pool;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, '+')) {
          if (!item.empty() && item != "none") pool.push_back(fsr::parse_reducer_spec(item));
        }
        g.pool.push_back(std::move(pool));
      }
    }
  }
};

int run_sweep(const Overrides& ov, const SweepFlags& flags) {
  fsr::RunConfig cfg = ov.build();
  flags.apply(cfg.sweep);
  const fsr::EmbeddingStore store = fsr::load_store(cfg.store_path);
  const auto rows = fsr::run_sweep(store, cfg);
  std::size_t width = 20;
  for (const auto& row : rows) width = std::max(width, row.label.size());
  std::cout << fmt::format("{:<{}}  {:>15}  {}\n", "(k p q r; dims; fit; pool)", width,
                           "accuracy %", "most chosen");
  for (const auto& row : rows) {
    std::cout << fmt::format("{:<{}}  {:>15}  {}\n", row.label, width,
                             fsr::format_mean_ci(row.mean_pct, row.ci95_pct), row.top_reducer);
  }
  if (!flags.summary_csv.empty()) {
    write_file(flags.summary_csv, [&](std::ostream& os) {
      os << "setting,mean_pct,ci95_pct,most_chosen\n";
      for (const auto& row : rows) {
        os << fmt::format("\"{}\",{:.17g},{:.17g},{}\n", row.label, row.mean_pct, row.ci95_pct,
                          row.top_reducer);
      }
    });
  }
  return kOk;
}

struct ScoreFlags {
  std::string file;
  int k = 5;
  double p = 2.0, q = 2.0, r = 2.0, degenerate = 0.5;
  std::string one_shot_rule = "drop_gamma";
  bool verbose = false;
};

int run_score(const ScoreFlags& f) {
  const fsr::EmbeddingSet set = fsr::load_store(f.file).to_embedding_set();
  fsr::IcnnParams params;
  params.k = f.k;
  params.p = f.p;
  params.q = f.q;
  params.r = f.r;
  params.one_shot_rule = fsr::parse_one_shot_rule(f.one_shot_rule);
  params.degenerate_spread_value = f.degenerate;
  params.validate();
  const auto out = fsr::icnn_breakdown(set.vectors(), set.labels(), params);
  if (f.verbose) {
    std::cout << "index,label,lambda,omega,gamma,contribution\n";
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      const auto& t = out.points[i];
      std::cout << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", i,
                               set.class_names()[static_cast<std::size_t>(set.labels()[i])],
                               t.lambda, t.omega, t.gamma, t.contribution);
    }
    if (out.one_shot) std::cout << "# no point has a same-class neighbor; one-shot rule applied\n";
  }
  std::cout << fmt::format("icnn {:.6f}\n", out.score);
  return kOk;
}

struct ReduceFlags {
  std::string file, reducer = "pca", out, format;
  int dim = 6;
  int shot = 1;
  std::uint64_t seed = 0;
};

int run_reduce(const ReduceFlags& f) {
  const fsr::EmbeddingStore store = fsr::load_store(f.file);
  const fsr::EmbeddingSet set = store.to_embedding_set();
  fsr::ReducerSpec spec = fsr::parse_reducer_spec(f.reducer);
  spec.target_dim = f.dim;
  const fsr::ReducedSet reduced =
      fsr::fit_transform(spec, set.vectors(), f.seed, fsr::FitContext{f.shot});
  fsr::EmbeddingStore result;
  for (Eigen::Index r = 0; r < reduced.vectors.rows(); ++r) {
    const Eigen::RowVectorXd row = reduced.vectors.row(r);
    result.add(set.class_names()[static_cast<std::size_t>(set.labels()[static_cast<std::size_t>(r)])],
               std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  const auto format = f.format.empty() ? fsr::format_for_path(f.out) : fsr::parse_store_format(f.format);
  fsr::save_store(result, f.out, format);
  std::cerr << fmt::format("{}: {} x {} -> {} x {}{}\n", spec.name(), set.rows(), set.dim(),
                           reduced.vectors.rows(), reduced.vectors.cols(),
                           reduced.degenerate ? " (degenerate)" : "");
  return kOk;
}

struct SynthFlags {
  fsr::SynthSpec spec;
  std::string out, format;
};

int run_synth(const SynthFlags& f) {
  const fsr::EmbeddingStore store = fsr::generate_store(f.spec);
  const auto format = f.format.empty() ? fsr::format_for_path(f.out) : fsr::parse_store_format(f.format);
  fsr::save_store(store, f.out, format);
  std::cerr << store.metadata << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-task reducer selection by ICNN score for few-shot evaluation"};
  app.require_subcommand(1);

  Overrides eval_ov;
  auto* eval = app.add_subcommand("eval", "episodic evaluation over a store");
  eval_ov.attach(eval);

  Overrides sweep_ov;
  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "evaluate a grid of design choices");
  sweep_ov.attach(sweep);
  sweep_flags.attach(sweep);

  ScoreFlags score_flags;
  auto* score = app.add_subcommand("score", "ICNN score of a labeled file");
  score->add_option("file", score_flags.file, "labeled store file")->required();
  score->add_option("--k", score_flags.k, "neighbor count");
  score->add_option("--p", score_flags.p);
  score->add_option("--q", score_flags.q);
  score->add_option("--r", score_flags.r);
  score->add_option("--one-shot-rule", score_flags.one_shot_rule);
  score->add_option("--degenerate-spread", score_flags.degenerate);
  score->add_flag("--verbose,-v", score_flags.verbose, "per-point lambda/omega/gamma");

  ReduceFlags reduce_flags;
  auto* reduce = app.add_subcommand("reduce", "apply one reducer to a file");
  reduce->add_option("file", reduce_flags.file)->required();
  reduce->add_option("--reducer", reduce_flags.reducer, "reducer spec (e.g. isomap:n_neighbors=8)");
  reduce->add_option("--dim", reduce_flags.dim, "target dimension");
  reduce->add_option("--shot", reduce_flags.shot, "shot hint for automatic isomap neighbors");
  reduce->add_option("--seed", reduce_flags.seed);
  reduce->add_option("--out", reduce_flags.out)->required();
  reduce->add_option("--format", reduce_flags.format, "csv | binary (default: by extension)");

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic store");
  synth->add_option("--classes", synth_flags.spec.classes);
  synth->add_option("--per-class", synth_flags.spec.vectors_per_class);
  synth->add_option("--informative", synth_flags.spec.informative_dims);
  synth->add_option("--noise-dims", synth_flags.spec.noise_dims);
  synth->add_option("--separation", synth_flags.spec.class_separation);
  synth->add_option("--noise-scale", synth_flags.spec.noise_scale);
  synth->add_option("--seed", synth_flags.spec.seed);
  synth->add_option("--out", synth_flags.out)->required();
  synth->add_option("--format", synth_flags.format, "csv | binary (default: by extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*eval) return run_eval(eval_ov);
    if (*sweep) return run_sweep(sweep_ov, sweep_flags);
    if (*score) return run_score(score_flags);
    if (*reduce) return run_reduce(reduce_flags);
    if (*synth) return run_synth(synth_flags);
  } catch (const fsr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const fsr::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fsr::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
