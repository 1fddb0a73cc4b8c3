#include "fsr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fsr/errors.hpp"

namespace fsr {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("config: bad value for '{}': {}", key, j.dump()));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::optional<int> k_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
  return get_as<int>(j, "icnn.k");
}

std::vector<ReducerSpec> pool_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("config: pool must be a list");
  std::vector<ReducerSpec> pool;
  for (const auto& item : j) pool.push_back(reducer_from_json(item));
  return pool;
}

std::vector<int> dims_from_json(const json& j) {
  auto dims = get_as<std::vector<int>>(j, "dims");
  if (dims.empty()) throw ConfigError("config: dims must not be empty");
  return dims;
}

}  // namespace

ReducerSpec reducer_from_json(const json& j) {
  if (j.is_string()) return parse_reducer_spec(j.get<std::string>());
  reject_unknown(j, {"kind", "gamma", "n_neighbors", "command", "name"}, "pool entry");
  if (!j.contains("kind")) throw ConfigError("pool entry: missing 'kind'");
  ReducerSpec spec;
  spec.kind = parse_reducer_kind(get_as<std::string>(j["kind"], "kind"));
  if (j.contains("gamma")) {
    if (spec.kind != ReducerKind::kernel_pca) throw ConfigError("gamma is a kernel_pca option");
    if (!(j["gamma"].is_string() && j["gamma"] == "auto")) {
      spec.rbf_gamma = get_as<double>(j["gamma"], "gamma");
    }
  }
  if (j.contains("n_neighbors")) {
    if (spec.kind != ReducerKind::isomap) throw ConfigError("n_neighbors is an isomap option");
    if (!(j["n_neighbors"].is_string() && j["n_neighbors"] == "auto")) {
      spec.n_neighbors = get_as<int>(j["n_neighbors"], "n_neighbors");
    }
  }
  if (j.contains("command") || j.contains("name")) {
    if (spec.kind != ReducerKind::external) {
      throw ConfigError("command/name are external reducer options");
    }
    if (j.contains("command")) spec.command = get_as<std::string>(j["command"], "command");
    if (j.contains("name")) spec.label = get_as<std::string>(j["name"], "name");
  }
  if (spec.kind == ReducerKind::external && spec.command.empty()) {
    throw ConfigError("external reducer needs a command");
  }
  return spec;
}

void apply_config_json(RunConfig& config, const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc,
                 {"store", "way", "shot", "queries", "episodes", "seed", "workers", "pool",
                  "dims", "fit_set", "score_set", "icnn", "output", "sweep"},
                 "config");
  auto& pipe = config.pipeline;
  if (doc.contains("store")) {
    config.store_path = resolve(base_dir, get_as<std::string>(doc["store"], "store"));
  }
  if (doc.contains("way")) config.episode.way = get_as<int>(doc["way"], "way");
  if (doc.contains("shot")) config.episode.shot = get_as<int>(doc["shot"], "shot");
  if (doc.contains("queries")) {
    config.episode.queries_per_class = get_as<int>(doc["queries"], "queries");
  }
  if (doc.contains("episodes")) pipe.episodes = get_as<int>(doc["episodes"], "episodes");
  if (doc.contains("seed")) pipe.seed = get_as<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("workers")) {
    const auto& w = doc["workers"];
    config.workers = w.is_string() && w == "auto" ? 0 : get_as<int>(w, "workers");
  }
  if (doc.contains("pool")) pipe.pool = pool_from_json(doc["pool"]);
  if (doc.contains("dims")) pipe.dims = dims_from_json(doc["dims"]);
  if (doc.contains("fit_set")) {
    pipe.fit_set = parse_fit_set(get_as<std::string>(doc["fit_set"], "fit_set"));
  }
  if (doc.contains("score_set")) {
    pipe.score_set = parse_score_set(get_as<std::string>(doc["score_set"], "score_set"));
  }
  if (doc.contains("icnn")) {
    const auto& ic = doc["icnn"];
    reject_unknown(ic, {"k", "p", "q", "r", "one_shot_rule", "degenerate_spread_value"}, "icnn");
    if (ic.contains("k")) pipe.icnn_k = k_from_json(ic["k"]);
    if (ic.contains("p")) pipe.icnn.p = get_as<double>(ic["p"], "icnn.p");
    if (ic.contains("q")) pipe.icnn.q = get_as<double>(ic["q"], "icnn.q");
    if (ic.contains("r")) pipe.icnn.r = get_as<double>(ic["r"], "icnn.r");
    if (ic.contains("one_shot_rule")) {
      pipe.icnn.one_shot_rule =
          parse_one_shot_rule(get_as<std::string>(ic["one_shot_rule"], "icnn.one_shot_rule"));
    }
    if (ic.contains("degenerate_spread_value")) {
      pipe.icnn.degenerate_spread_value =
          get_as<double>(ic["degenerate_spread_value"], "icnn.degenerate_spread_value");
    }
  }
  if (doc.contains("output")) {
    const auto& out = doc["output"];
    reject_unknown(out, {"csv", "jsonl"}, "output");
    if (out.contains("csv")) config.csv_path = resolve(base_dir, get_as<std::string>(out["csv"], "output.csv"));
    if (out.contains("jsonl")) {
      config.jsonl_path = resolve(base_dir, get_as<std::string>(out["jsonl"], "output.jsonl"));
    }
  }
  if (doc.contains("sweep")) {
    const auto& sw = doc["sweep"];
    reject_unknown(sw, {"k", "p", "q", "r", "dims", "fit_set", "pool"}, "sweep");
    auto& g = config.sweep;
    if (sw.contains("k")) {
      g.k.clear();
      for (const auto& v : sw["k"]) g.k.push_back(k_from_json(v));
    }
    if (sw.contains("p")) g.p = get_as<std::vector<double>>(sw["p"], "sweep.p");
    if (sw.contains("q")) g.q = get_as<std::vector<double>>(sw["q"], "sweep.q");
    if (sw.contains("r")) g.r = get_as<std::vector<double>>(sw["r"], "sweep.r");
    if (sw.contains("dims")) {
      g.dims.clear();
      for (const auto& v : sw["dims"]) g.dims.push_back(dims_from_json(v));
    }
    if (sw.contains("fit_set")) {
      g.fit_set.clear();
      for (const auto& v : sw["fit_set"]) {
        g.fit_set.push_back(parse_fit_set(get_as<std::string>(v, "sweep.fit_set")));
      }
    }
    if (sw.contains("pool")) {
      g.pool.clear();
      for (const auto& v : sw["pool"]) g.pool.push_back(pool_from_json(v));
    }
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  RunConfig config;
  apply_config_json(config, doc, path.parent_path());
  return config;
}

void RunConfig::check_paths() const {
  if (store_path.empty()) throw ConfigError("no store given (config 'store' or --store)");
  if (!std::filesystem::exists(store_path)) {
    throw ConfigError("store '" + store_path.string() + "' does not exist");
  }
  for (const auto& out : {csv_path, jsonl_path}) {
    if (!out) continue;
    const auto dir = out->parent_path();
    if (!dir.empty() && !std::filesystem::is_directory(dir)) {
      throw ConfigError("output directory '" + dir.string() + "' does not exist");
    }
  }
}

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text, T (*conv)(const std::string&, std::size_t*)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(conv(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad list element '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

int to_int(const std::string& s, std::size_t* used) { return std::stoi(s, used); }
double to_double(const std::string& s, std::size_t* used) { return std::stod(s, used); }

std::string pool_label(const std::vector<ReducerSpec>& pool) {
  if (pool.empty()) return "none";
  std::string s;
  for (const auto& r : pool) {
    if (!s.empty()) s += '+';
    s += r.kind == ReducerKind::external ? (r.label.empty() ? "external" : r.label)
                                         : to_string(r.kind);
  }
  return s;
}

std::string dims_label(const std::vector<int>& dims) {
  std::string s;
  for (int d : dims) s += (s.empty() ? "" : "/") + std::to_string(d);
  return s;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) { return parse_list<int>(text, to_int); }

std::vector<double> parse_double_list(const std::string& text) {
  return parse_list<double>(text, to_double);
}

std::vector<std::pair<std::string, PipelineConfig>> expand_sweep(const RunConfig& config) {
  const auto& g = config.sweep;
  const auto& base = config.pipeline;
  auto or_base = [](const auto& axis, auto value) {
    using T = decltype(value);
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto ks = or_base(g.k, base.icnn_k);
  const auto ps = or_base(g.p, base.icnn.p);
  const auto qs = or_base(g.q, base.icnn.q);
  const auto rs = or_base(g.r, base.icnn.r);
  const auto dims = or_base(g.dims, base.dims);
  const auto fits = or_base(g.fit_set, base.fit_set);
  const auto pools = or_base(g.pool, base.pool);

  std::vector<std::pair<std::string, PipelineConfig>> out;
  for (const auto& k : ks)
    for (double p : ps)
      for (double q : qs)
        for (double r : rs)
          for (const auto& d : dims)
            for (FitSet f : fits)
              for (const auto& pool : pools) {
                PipelineConfig c = base;
                c.icnn_k = k;
                c.icnn.p = p;
                c.icnn.q = q;
                c.icnn.r = r;
                c.dims = d;
                c.fit_set = f;
                c.pool = pool;
                out.emplace_back(fmt::format("k={} p={:g} q={:g} r={:g}; dims={}; {}; {}",
                                             k ? std::to_string(*k) : "auto", p, q, r,
                                             dims_label(d), to_string(f), pool_label(pool)),
                                 std::move(c));
              }
  return out;
}

std::vector<SweepRow> run_sweep(const EmbeddingStore& store, const RunConfig& config) {
  std::vector<SweepRow> rows;
  for (auto& [label, pipe] : expand_sweep(config)) {
    const EvalReport report = evaluate(store, config.episode, pipe, config.workers);
    std::string top;
    int best = -1;
    for (const auto& [name, count] : report.selection_histogram) {
      if (count > best) {
        best = count;
        top = name;
      }
    }
    rows.push_back({label, pipe, report.mean_pct, report.ci95_pct, top});
  }
  return rows;
}

}  // namespace fsr
