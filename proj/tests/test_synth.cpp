#include <gtest/gtest.h>

#include <cmath>

#include "fsr/errors.hpp"
#include "fsr/icnn.hpp"
#include "fsr/pipeline.hpp"
#include "fsr/synth.hpp"
#include "oracles.hpp"

using namespace fsr;

namespace {

void expect_pairwise_spacing(const Matrix& centers, double separation) {
  const Matrix d = oracle::naive_distances(centers);
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.rows(); ++j) EXPECT_NEAR(d(i, j), separation, 1e-9);
}

}  // namespace

TEST(ClassCenters, EquidistantLayouts) {
  expect_pairwise_spacing(class_centers(5, 6, 3.0), 3.0);   // orthogonal
  expect_pairwise_spacing(class_centers(5, 5, 3.0), 3.0);   // orthogonal, square
  expect_pairwise_spacing(class_centers(5, 4, 2.5), 2.5);   // simplex
  expect_pairwise_spacing(class_centers(3, 2, 1.0), 1.0);   // triangle
  EXPECT_EQ(class_centers(4, 6, 0.0), Matrix::Zero(4, 6));
}

TEST(ClassCenters, LowDimensionFallbacks) {
  const Matrix polygon = class_centers(5, 2, 8.0);
  for (int c = 0; c < 5; ++c)
    EXPECT_NEAR((polygon.row(c) - polygon.row((c + 1) % 5)).norm(), 8.0, 1e-9);
  const Matrix line = class_centers(4, 1, 2.0);
  for (int c = 0; c + 1 < 4; ++c) EXPECT_NEAR(std::abs(line(c + 1, 0) - line(c, 0)), 2.0, 1e-12);
}

TEST(GenerateStore, ShapeNamesAndDeterminism) {
  SynthSpec s;
  s.classes = 4;
  s.vectors_per_class = 10;
  s.informative_dims = 3;
  s.noise_dims = 2;
  s.seed = 7;
  const auto a = generate_store(s);
  EXPECT_EQ(a.class_count(), 4);
  EXPECT_EQ(a.dim(), 5);
  EXPECT_EQ(a.classes()[0].name, "class_000");
  EXPECT_EQ(a.classes()[3].name, "class_003");
  const auto b = generate_store(s);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(a.classes()[c].vectors, b.classes()[c].vectors);
  s.seed = 8;
  EXPECT_NE(generate_store(s).classes()[0].vectors, a.classes()[0].vectors);
}

TEST(GenerateStore, SampleMeansNearCenters) {
  SynthSpec s;
  s.classes = 6;
  s.vectors_per_class = 200;
  s.informative_dims = 6;
  s.noise_dims = 4;
  s.noise_scale = 3.0;
  s.class_separation = 4.0;
  s.seed = 3;
  const auto store = generate_store(s);
  const Matrix centers = class_centers(6, 6, 4.0);
  for (int c = 0; c < 6; ++c) {
    const Eigen::RowVectorXd mean = store.classes()[c].vectors.colwise().mean();
    EXPECT_LT((mean.head(6) - centers.row(c)).norm(), 5.0 / std::sqrt(200.0));
    EXPECT_LT(mean.tail(4).norm(), 5.0 * 3.0 / std::sqrt(200.0));
  }
}

TEST(GenerateStore, RejectsInvalidSpec) {
  SynthSpec s;
  s.classes = 0;
  EXPECT_THROW(generate_store(s), ConfigError);
  s = SynthSpec{};
  s.informative_dims = 0;
  s.noise_dims = 0;
  EXPECT_THROW(generate_store(s), ConfigError);
  s = SynthSpec{};
  s.class_separation = -1.0;
  EXPECT_THROW(generate_store(s), ConfigError);
}

TEST(GenerateStore, ZeroSeparationIsChanceLevel) {
  SynthSpec s;
  s.classes = 10;
  s.vectors_per_class = 40;
  s.informative_dims = 6;
  s.class_separation = 0.0;
  s.seed = 2;
  PipelineConfig cfg;
  cfg.pool.clear();
  cfg.episodes = 200;
  const auto report = evaluate(generate_store(s), {5, 5, 15}, cfg);
  // Binomial 3-sigma band around 20% over 200 x 75 queries.
  const double sigma = std::sqrt(0.2 * 0.8 / (200.0 * 75.0));
  EXPECT_NEAR(report.mean_pct / 100.0, 0.2, 3.0 * sigma);
}

TEST(GenerateStore, LargeSeparationIsPerfect) {
  SynthSpec s;
  s.classes = 6;
  s.vectors_per_class = 30;
  s.informative_dims = 6;
  s.class_separation = 50.0;
  s.seed = 4;
  PipelineConfig cfg;
  cfg.episodes = 20;
  EXPECT_EQ(evaluate(generate_store(s), {5, 5, 15}, cfg).mean_pct, 100.0);
}

TEST(SeparabilityScenario, ShapeAndDeterminism) {
  const auto a = separability_scenario(SeparabilityLevel::mid, 5, 3, 11);
  EXPECT_EQ(a.rows(), 15);
  EXPECT_EQ(a.dim(), 2);
  EXPECT_EQ(a.class_count(), 5);
  EXPECT_EQ(a.vectors(), separability_scenario(SeparabilityLevel::mid, 5, 3, 11).vectors());
}

TEST(SeparabilityScenario, ScoresOrderedByLevel) {
  IcnnParams p;
  p.k = 5;
  double mean[3] = {0, 0, 0};
  const SeparabilityLevel levels[3] = {SeparabilityLevel::low, SeparabilityLevel::mid,
                                       SeparabilityLevel::high};
  for (int l = 0; l < 3; ++l)
    for (std::uint64_t seed = 0; seed < 100; ++seed)
      mean[l] += icnn_score(separability_scenario(levels[l], 5, 5, seed), p) / 100.0;
  EXPECT_LT(mean[0], mean[1]);
  EXPECT_LT(mean[1], mean[2]);
}
