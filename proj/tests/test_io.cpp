#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsr/config.hpp"
#include "fsr/errors.hpp"
#include "fsr/store_io.hpp"
#include "fsr/synth.hpp"

using namespace fsr;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("fsr_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FSR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

EmbeddingStore float_exact_store() {
  SynthSpec s;
  s.classes = 3;
  s.vectors_per_class = 4;
  s.informative_dims = 5;
  s.seed = 1;
  const auto g = generate_store(s);
  EmbeddingStore out;
  for (const auto& c : g.classes()) out.add_class(c.name, c.vectors.cast<float>().cast<double>());
  return out;
}

void expect_same_store(const EmbeddingStore& a, const EmbeddingStore& b) {
  ASSERT_EQ(a.class_count(), b.class_count());
  for (int c = 0; c < a.class_count(); ++c) {
    EXPECT_EQ(a.classes()[c].name, b.classes()[c].name);
    EXPECT_EQ(a.classes()[c].vectors, b.classes()[c].vectors);
  }
}

std::string error_of(const std::string& bytes) {
  try {
    parse_store(bytes, "in");
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(StoreCsv, ParsesThreeRowsTwoClasses) {
  const auto store = parse_store("label,f0,f1\ncat,1,2\ndog,3e0,-4.5\ncat,0.5,1E-3\n");
  EXPECT_EQ(store.class_count(), 2);
  EXPECT_EQ(store.dim(), 2);
  EXPECT_EQ(store.classes()[0].vectors.rows(), 2);
  EXPECT_DOUBLE_EQ(store.classes()[0].vectors(1, 1), 1e-3);
}

TEST(StoreCsv, ErrorsNameTheLine) {
  EXPECT_NE(error_of("label,f0,f1\na,1,2\nb,3\n").find("in:3"), std::string::npos);
  EXPECT_NE(error_of("label,f0\na,xyz\n").find("in:2"), std::string::npos);
  EXPECT_NE(error_of("label,f0\na,nan\n").find("non-finite"), std::string::npos);
  EXPECT_NE(error_of("label,f0\n,1\n").find("empty label"), std::string::npos);
  EXPECT_NE(error_of("name,x\na,1\n").find("header"), std::string::npos);
  EXPECT_FALSE(error_of("label,f0\n").empty());
}

TEST(StoreCsv, RoundTripsDoublesExactly) {
  SynthSpec s;
  s.classes = 3;
  s.vectors_per_class = 5;
  s.informative_dims = 4;
  const auto store = generate_store(s);
  expect_same_store(store, parse_store(serialize_store(store, StoreFormat::csv)));
}

TEST(StoreBinary, RoundTripIsBitIdentical) {
  const auto store = float_exact_store();
  const std::string bytes = serialize_store(store, StoreFormat::binary);
  EXPECT_EQ(bytes.substr(0, 4), "FSE1");
  const auto back = parse_store(bytes);
  expect_same_store(store, back);
  EXPECT_EQ(serialize_store(back, StoreFormat::binary), bytes);
}

TEST(StoreBinary, LayoutMatchesFormat) {
  EmbeddingStore store;
  const std::vector<double> v{1.5, -2.0};
  store.add("ab", v);
  const std::string bytes = serialize_store(store, StoreFormat::binary);
  // magic + version + n + d + 2 floats + (u16 + 2 bytes)
  ASSERT_EQ(bytes.size(), 4u + 12u + 8u + 4u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);  // n
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2); // d
  float f = 0;
  std::memcpy(&f, bytes.data() + 16, 4);
  EXPECT_EQ(f, 1.5f);
  EXPECT_EQ(bytes.substr(26), "ab");
}

TEST(StoreBinary, RejectsBadVersionAndTruncation) {
  std::string bytes = serialize_store(float_exact_store(), StoreFormat::binary);
  std::string bad = bytes;
  bad[4] = 2;
  EXPECT_NE(error_of(bad).find("version"), std::string::npos);
  EXPECT_NE(error_of(bytes.substr(0, bytes.size() - 3)).find("truncated"), std::string::npos);
  EXPECT_NE(error_of(bytes.substr(0, 10)).find("truncated"), std::string::npos);
  EXPECT_FALSE(error_of(bytes + "x").empty());
}

TEST(StoreFiles, DetectionIgnoresExtension) {
  TempDir dir;
  const auto store = float_exact_store();
  save_store(store, dir / "binary.csv", StoreFormat::binary);
  save_store(store, dir / "text.bin", StoreFormat::csv);
  expect_same_store(store, load_store(dir / "binary.csv"));
  expect_same_store(store, load_store(dir / "text.bin"));
  EXPECT_EQ(format_for_path("a.csv"), StoreFormat::csv);
  EXPECT_EQ(format_for_path("a.fse"), StoreFormat::binary);
  EXPECT_THROW(load_store(dir / "missing.csv"), DataError);
}

TEST(StoreFiles, EmptyStoreCannotBeSaved) {
  TempDir dir;
  EXPECT_THROW(save_store(EmbeddingStore{}, dir / "e.csv", StoreFormat::csv), DataError);
  EXPECT_THROW(serialize_store(EmbeddingStore{}, StoreFormat::binary), DataError);
}

TEST(Config, AppliesKeysAndRejectsUnknown) {
  RunConfig cfg;
  const auto doc = nlohmann::json::parse(R"({
    "store": "s.csv", "way": 3, "shot": 1, "episodes": 10, "seed": 4,
    "pool": ["pca", {"kind": "isomap", "n_neighbors": 6}], "dims": [4, 2],
    "fit_set": "support_only", "icnn": {"k": 4, "p": 1.5, "one_shot_rule": "zero_score"},
    "output": {"csv": "out/e.csv"}
  })");
  apply_config_json(cfg, doc, "/base");
  EXPECT_EQ(cfg.store_path, fs::path("/base/s.csv"));
  EXPECT_EQ(cfg.episode.way, 3);
  EXPECT_EQ(cfg.episode.shot, 1);
  EXPECT_EQ(cfg.pipeline.episodes, 10);
  EXPECT_EQ(cfg.pipeline.seed, 4u);
  ASSERT_EQ(cfg.pipeline.pool.size(), 2u);
  EXPECT_EQ(cfg.pipeline.pool[1].n_neighbors, 6);
  EXPECT_EQ(cfg.pipeline.dims, (std::vector<int>{4, 2}));
  EXPECT_EQ(cfg.pipeline.fit_set, FitSet::support_only);
  EXPECT_EQ(cfg.pipeline.icnn_k, 4);
  EXPECT_EQ(cfg.pipeline.icnn.p, 1.5);
  EXPECT_EQ(cfg.pipeline.icnn.one_shot_rule, OneShotRule::zero_score);
  EXPECT_EQ(cfg.csv_path, fs::path("/base/out/e.csv"));

  RunConfig fresh;
  EXPECT_THROW(apply_config_json(fresh, nlohmann::json::parse(R"({"shots": 5})")), ConfigError);
  EXPECT_THROW(apply_config_json(fresh, nlohmann::json::parse(R"({"icnn": {"kk": 5}})")),
               ConfigError);
  EXPECT_THROW(apply_config_json(fresh, nlohmann::json::parse(R"({"way": "five"})")), ConfigError);
}

TEST(Config, LoadChecksPaths) {
  TempDir dir;
  write_file(dir / "c.json", R"({"store": "nope.csv"})");
  EXPECT_THROW(load_run_config(dir / "c.json").check_paths(), ConfigError);
  write_file(dir / "broken.json", "{");
  EXPECT_THROW(load_run_config(dir / "broken.json"), ConfigError);
}

TEST(Config, ListParsing) {
  EXPECT_EQ(parse_int_list("6,8,10"), (std::vector<int>{6, 8, 10}));
  EXPECT_EQ(parse_double_list("0.5,2"), (std::vector<double>{0.5, 2.0}));
  EXPECT_THROW(parse_int_list("6,x"), ConfigError);
  EXPECT_THROW(parse_int_list(""), ConfigError);
}

TEST(Sweep, GridExpandsLastAxisFastest) {
  RunConfig cfg;
  cfg.sweep.k = {3, std::nullopt};
  cfg.sweep.dims = {{6}, {4, 2}};
  const auto grid = expand_sweep(cfg);
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0].second.icnn_k, 3);
  EXPECT_EQ(grid[0].second.dims, (std::vector<int>{6}));
  EXPECT_EQ(grid[1].second.dims, (std::vector<int>{4, 2}));
  EXPECT_FALSE(grid[2].second.icnn_k.has_value());
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto store = (dir / "s.csv").string();
  EXPECT_EQ(run_cli("synth --classes 6 --per-class 25 --informative 4 --seed 3 --out " + store), 0);
  EXPECT_EQ(run_cli("eval --store " + store + " --episodes 5 --workers 1"), 0);
  EXPECT_EQ(run_cli("eval --store " + store + " --episodes 0"), 1);
  EXPECT_EQ(run_cli("eval --store " + store + " --pool tsne"), 1);
  EXPECT_EQ(run_cli("eval --store " + (dir / "missing.csv").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);

  write_file(dir / "bad.csv", "label,f0,f1\na,1\n");
  EXPECT_EQ(run_cli("eval --store " + (dir / "bad.csv").string()), 2);
  EXPECT_EQ(run_cli("score " + (dir / "bad.csv").string()), 2);

  write_file(dir / "typo.json", R"({"store": "s.csv", "episdoes": 3})");
  EXPECT_EQ(run_cli("eval --config " + (dir / "typo.json").string()), 1);

  EXPECT_EQ(run_cli("score " + store + " --k 4 --verbose"), 0);
  EXPECT_EQ(run_cli("reduce " + store + " --reducer pca --dim 2 --out " +
                    (dir / "r.csv").string()),
            0);
  EXPECT_EQ(load_store(dir / "r.csv").dim(), 2);
}

TEST(Cli, FlagsOverrideConfigAndOutputsAreReproducible) {
  TempDir dir;
  const auto store = (dir / "s.fse").string();
  ASSERT_EQ(run_cli("synth --classes 6 --per-class 25 --informative 4 --seed 3 --out " + store), 0);
  write_file(dir / "run.json",
             R"({"store": "s.fse", "episodes": 50, "seed": 9, "output": {"csv": "a.csv"}})");
  const auto cfg = (dir / "run.json").string();
  ASSERT_EQ(run_cli("eval --config " + cfg + " --episodes 4"), 0);
  const std::string first = read_file(dir / "a.csv");
  // Header plus the four episodes requested on the command line.
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 5);
  ASSERT_EQ(run_cli("eval --config " + cfg + " --episodes 4 --workers 3"), 0);
  EXPECT_EQ(read_file(dir / "a.csv"), first);
}

TEST(Cli, SweepWritesSummary) {
  TempDir dir;
  const auto store = (dir / "s.csv").string();
  ASSERT_EQ(run_cli("synth --classes 6 --per-class 25 --informative 8 --seed 3 --out " + store), 0);
  const auto summary = dir / "sweep.csv";
  ASSERT_EQ(run_cli("sweep --store " + store + " --episodes 3 --grid-k 3,5 --grid-dims 6 " +
                    "--grid-dims 4,2 --summary-csv " + summary.string()),
            0);
  const std::string text = read_file(summary);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
