#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "fsr/core.hpp"
#include "fsr/errors.hpp"
#include "fsr/synth.hpp"
#include "oracles.hpp"

using namespace fsr;

namespace {

EmbeddingStore grid_store(int classes, int per_class, int dim = 4) {
  EmbeddingStore store;
  for (int c = 0; c < classes; ++c) {
    Matrix m(per_class, dim);
    for (int r = 0; r < per_class; ++r)
      for (int j = 0; j < dim; ++j) m(r, j) = c * 1000.0 + r + 0.001 * j;
    store.add_class("c" + std::to_string(c), m);
  }
  return store;
}

}  // namespace

TEST(EmbeddingSet, InternsLabelsInFirstOccurrenceOrder) {
  const auto set = make_embedding_set({{0, 0}, {1, 1}, {2, 2}}, {"a", "a", "b"});
  EXPECT_EQ(set.class_count(), 2);
  EXPECT_EQ(set.labels(), (std::vector<ClassId>{0, 0, 1}));
  EXPECT_EQ(set.class_names(), (std::vector<std::string>{"a", "b"}));

  const auto swapped = make_embedding_set({{0, 0}, {1, 1}, {2, 2}}, {"z", "y", "z"});
  EXPECT_EQ(swapped.labels(), (std::vector<ClassId>{0, 1, 0}));
}

TEST(EmbeddingSet, RejectsRaggedRows) {
  try {
    make_embedding_set({{0, 0}, {1, 1, 1}}, {"a", "b"});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch at row 1"), std::string::npos);
  }
}

TEST(EmbeddingSet, RejectsNonFiniteAndNamesRow) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    make_embedding_set({{0, 0}, {1, 1}, {2, nan}}, {"a", "b", "b"});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(make_embedding_set({{std::numeric_limits<double>::infinity()}}, {"a"}), DataError);
}

TEST(EmbeddingSet, RejectsLabelCountMismatchAndEmpty) {
  EXPECT_THROW(make_embedding_set({{0.0}, {1.0}}, {"a"}), DataError);
  EXPECT_THROW(make_embedding_set(std::vector<std::vector<double>>{}, {}), DataError);
}

TEST(EmbeddingStore, RejectsDimensionChange) {
  EmbeddingStore store;
  const std::vector<double> a{1, 2}, b{1, 2, 3};
  store.add("x", a);
  EXPECT_THROW(store.add("y", b), DataError);
  EXPECT_EQ(store.class_count(), 1);
}

TEST(SampleEpisode, ProducesForcedCounts) {
  const auto store = grid_store(20, 100);
  const Episode ep = sample_episode(store, {5, 5, 15}, 42);
  EXPECT_EQ(ep.support.rows(), 25);
  EXPECT_EQ(ep.query.rows(), 75);
  for (ClassId c = 0; c < 5; ++c) {
    EXPECT_EQ(std::count(ep.support.labels().begin(), ep.support.labels().end(), c), 5);
    EXPECT_EQ(std::count(ep.query.labels().begin(), ep.query.labels().end(), c), 15);
  }
}

TEST(SampleEpisode, SupportAndQueryAreDisjointAndClassConsistent) {
  const auto store = grid_store(8, 30);
  const Episode ep = sample_episode(store, {4, 3, 7}, 9);
  std::set<std::pair<double, double>> support_rows;
  for (Eigen::Index r = 0; r < ep.support.rows(); ++r) {
    support_rows.insert({ep.support.vectors()(r, 0), ep.support.vectors()(r, 1)});
    // Row value encodes the store class; the label's name must match it.
    const int store_class = static_cast<int>(ep.support.vectors()(r, 0) / 1000.0);
    EXPECT_EQ(ep.support.class_names()[ep.support.labels()[r]],
              "c" + std::to_string(store_class));
  }
  for (Eigen::Index r = 0; r < ep.query.rows(); ++r) {
    EXPECT_FALSE(support_rows.contains({ep.query.vectors()(r, 0), ep.query.vectors()(r, 1)}));
  }
}

TEST(SampleEpisode, DeterministicForSeed) {
  const auto store = grid_store(10, 40);
  const Episode a = sample_episode(store, {5, 5, 15}, 1234);
  const Episode b = sample_episode(store, {5, 5, 15}, 1234);
  const Episode c = sample_episode(store, {5, 5, 15}, 1235);
  EXPECT_EQ(a.support.vectors(), b.support.vectors());
  EXPECT_EQ(a.query.vectors(), b.query.vectors());
  EXPECT_EQ(a.support.class_names(), b.support.class_names());
  EXPECT_NE(a.support.vectors(), c.support.vectors());
}

TEST(SampleEpisode, ErrorsOnInsufficientData) {
  const auto one_class = grid_store(1, 50);
  EXPECT_THROW(sample_episode(one_class, {2, 1, 1}, 0), DataError);

  EmbeddingStore store = grid_store(3, 30);
  store.add_class("tiny", Matrix::Zero(4, 4));
  bool saw_tiny = false;
  for (std::uint64_t seed = 0; seed < 50 && !saw_tiny; ++seed) {
    try {
      sample_episode(store, {4, 2, 3}, seed);
    } catch (const DataError& e) {
      saw_tiny = std::string(e.what()).find("'tiny'") != std::string::npos;
    }
  }
  EXPECT_TRUE(saw_tiny);
  EXPECT_THROW(sample_episode(store, {1, 1, 1}, 0), ConfigError);
}

TEST(SampleEpisode, CoversAllClassesOverManyDraws) {
  const auto store = grid_store(20, 25);
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Episode ep = sample_episode(store, {5, 1, 1}, s);
    seen.insert(ep.support.class_names().begin(), ep.support.class_names().end());
  }
  EXPECT_EQ(seen.size(), 20u);
}

TEST(PairwiseDistances, ThreeFourFive) {
  const auto d = pairwise_distances(make_embedding_set({{0, 0}, {3, 4}}, {"a", "b"}));
  EXPECT_DOUBLE_EQ(d(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(PairwiseDistances, MatchesNaiveDoubleLoop) {
  const Matrix x = oracle::gaussian_matrix(77, 10, 6);
  const auto d = pairwise_distances(x);
  const Matrix ref = oracle::naive_distances(x);
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (Eigen::Index j = 0; j < 10; ++j) EXPECT_NEAR(d(i, j), ref(i, j), 1e-12);
  }
}

TEST(PairwiseDistances, InvariantUnderRigidMotion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = oracle::gaussian_matrix(seed, 15, 5);
    const Matrix rot = oracle::random_rotation(seed + 100, 5);
    const Eigen::RowVectorXd shift = oracle::gaussian_matrix(seed + 200, 1, 5, 10.0);
    const Matrix moved = (x * rot).rowwise() + shift;
    const Matrix diff = pairwise_distances(x).values() - pairwise_distances(moved).values();
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(KnnSplit, RectangleExample) {
  const auto x = make_embedding_set({{0, 0}, {0, 1}, {10, 0}, {10, 1}}, {"A", "A", "B", "B"});
  const auto split = knn_split(pairwise_distances(x), x.labels(), 0, 2);
  ASSERT_EQ(split.same.size(), 1u);
  ASSERT_EQ(split.diff.size(), 1u);
  EXPECT_EQ(split.same[0].index, 1);
  EXPECT_DOUBLE_EQ(split.same[0].distance, 1.0);
  EXPECT_EQ(split.diff[0].index, 2);
  EXPECT_DOUBLE_EQ(split.diff[0].distance, 10.0);
  EXPECT_DOUBLE_EQ(split.theta, 1.0);
  EXPECT_DOUBLE_EQ(split.alpha, 10.0);
}

TEST(KnnSplit, TieAtBoundaryPrefersSmallerIndex) {
  // Points 1 and 2 are both at distance 1 from point 0; k = 1 keeps point 1.
  const auto x = make_embedding_set({{0, 0}, {1, 0}, {-1, 0}, {5, 5}}, {"a", "b", "a", "b"});
  const auto split = knn_split(pairwise_distances(x), x.labels(), 0, 1);
  ASSERT_EQ(split.size(), 1u);
  EXPECT_EQ(split.diff.at(0).index, 1);

  // Same geometry, indices reversed: the tie now resolves to the other point.
  const auto y = make_embedding_set({{0, 0}, {-1, 0}, {1, 0}, {5, 5}}, {"a", "a", "b", "b"});
  const auto split_y = knn_split(pairwise_distances(y), y.labels(), 0, 1);
  EXPECT_EQ(split_y.same.at(0).index, 1);
}

TEST(KnnSplit, RejectsOutOfRangeK) {
  const auto x = make_embedding_set({{0.0}, {1.0}, {2.0}}, {"a", "b", "a"});
  const auto d = pairwise_distances(x);
  EXPECT_THROW(knn_split(d, x.labels(), 0, 0), DataError);
  EXPECT_THROW(knn_split(d, x.labels(), 0, 3), DataError);
}

TEST(KnnSplit, PartitionPropertyAndShotGuarantee) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int shot = 2 + static_cast<int>(seed % 4);
    const auto set = separability_scenario(SeparabilityLevel::mid, 5, shot, seed);
    const auto d = pairwise_distances(set);
    for (Eigen::Index i = 0; i < set.rows(); ++i) {
      for (int k = 1; k < set.rows(); ++k) {
        const auto split = knn_split(d, set.labels(), i, k);
        EXPECT_EQ(split.size(), static_cast<std::size_t>(k));
        EXPECT_LE(split.theta, split.alpha);
      }
      const auto at_shot = knn_split(d, set.labels(), i, shot);
      EXPECT_LE(at_shot.same.size(), static_cast<std::size_t>(shot - 1));
      EXPECT_GE(at_shot.diff.size(), 1u);
      const auto all = knn_split(d, set.labels(), i, static_cast<int>(set.rows() - 1));
      EXPECT_EQ(all.size(), static_cast<std::size_t>(set.rows() - 1));
    }
  }
}
