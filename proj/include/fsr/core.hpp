#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ClassId = int;

// Labeled n x d matrix of embedding vectors. Labels are interned to dense
// ids in first-occurrence order; `class_names()[id]` recovers the original
// label string.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  // Validates shape and finiteness. Throws DataError.
  EmbeddingSet(Matrix vectors, std::vector<ClassId> labels,
               std::vector<std::string> class_names);

  const Matrix& vectors() const { return vectors_; }
  const std::vector<ClassId>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  Eigen::Index rows() const { return vectors_.rows(); }
  Eigen::Index dim() const { return vectors_.cols(); }
  int class_count() const { return static_cast<int>(class_names_.size()); }

 private:
  Matrix vectors_;
  std::vector<ClassId> labels_;
  std::vector<std::string> class_names_;
};

// Builds a validated set from row vectors and string labels.
EmbeddingSet make_embedding_set(const std::vector<std::vector<double>>& vectors,
                                const std::vector<std::string>& labels);

// Same, for vectors already in matrix form.
EmbeddingSet embedding_set_from_matrix(Matrix vectors, const std::vector<std::string>& labels);

// Throws DataError naming the first non-finite entry.
void require_finite(const Matrix& m, const char* what);

struct StoreClass {
  std::string name;
  Matrix vectors;  // one row per embedding
};

// Per-class pool of embeddings that episodes are drawn from. Classes keep
// insertion order; every class holds at least one vector and all vectors
// share the same dimension.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  // Appends to an existing class of the same name or creates a new one.
  void add(const std::string& label, std::span<const double> vector);
  void add_class(std::string name, Matrix vectors);

  const std::vector<StoreClass>& classes() const { return classes_; }
  int class_count() const { return static_cast<int>(classes_.size()); }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index total_vectors() const;
  bool empty() const { return classes_.empty(); }

  // Flattens the store into one set, classes in store order.
  EmbeddingSet to_embedding_set() const;

  std::string metadata;

 private:
  std::vector<StoreClass> classes_;
  Eigen::Index dim_ = 0;
};

struct EpisodeSpec {
  int way = 5;
  int shot = 5;
  int queries_per_class = 15;

  void validate() const;  // throws ConfigError
};

// One N-way K-shot task. Class ids 0..way-1 follow the sampled class order
// and are shared between support and query; rows are grouped by class.
struct Episode {
  EmbeddingSet support;
  EmbeddingSet query;
  EpisodeSpec spec;
};

Episode sample_episode(const EmbeddingStore& store, const EpisodeSpec& spec,
                       std::uint64_t seed);

// Symmetric matrix of Euclidean distances with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(Matrix values) : values_(std::move(values)) {}

  const Matrix& values() const { return values_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  Eigen::Index size() const { return values_.rows(); }

 private:
  Matrix values_;
};

DistanceMatrix pairwise_distances(const Matrix& x);
inline DistanceMatrix pairwise_distances(const EmbeddingSet& x) {
  return pairwise_distances(x.vectors());
}

struct Neighbor {
  Eigen::Index index;
  double distance;
};

// The k nearest neighbors of one point, partitioned by whether they share
// the point's class. theta/alpha are the min/max neighbor distance.
struct NeighborSplit {
  std::vector<Neighbor> same;
  std::vector<Neighbor> diff;
  double theta = 0.0;
  double alpha = 0.0;

  std::size_t size() const { return same.size() + diff.size(); }
};

// k nearest neighbors of point i among all other points (ties: smaller
// index first), split by label equality with point i.
NeighborSplit knn_split(const DistanceMatrix& d, std::span<const ClassId> labels,
                        Eigen::Index i, int k);

}  // namespace fsr
