#include "fsr/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fsr/errors.hpp"
#include "fsr/rng.hpp"

namespace fsr {

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw DataError(std::string(what) + ": non-finite value at row " + std::to_string(r) +
                        ", column " + std::to_string(c));
      }
    }
  }
}

EmbeddingSet::EmbeddingSet(Matrix vectors, std::vector<ClassId> labels,
                           std::vector<std::string> class_names)
    : vectors_(std::move(vectors)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (vectors_.rows() < 1 || vectors_.cols() < 1) {
    throw DataError("embedding set: need at least one row and one column");
  }
  if (static_cast<Eigen::Index>(labels_.size()) != vectors_.rows()) {
    throw DataError("embedding set: " + std::to_string(labels_.size()) + " labels for " +
                    std::to_string(vectors_.rows()) + " rows");
  }
  if (class_names_.empty()) {
    throw DataError("embedding set: no classes");
  }
  for (ClassId id : labels_) {
    if (id < 0 || id >= static_cast<ClassId>(class_names_.size())) {
      throw DataError("embedding set: label id " + std::to_string(id) + " out of range");
    }
  }
  require_finite(vectors_, "embedding set");
}

EmbeddingSet embedding_set_from_matrix(Matrix vectors, const std::vector<std::string>& labels) {
  std::vector<ClassId> ids;
  std::vector<std::string> names;
  std::unordered_map<std::string, ClassId> interned;
  ids.reserve(labels.size());
  for (const auto& label : labels) {
    auto [it, inserted] = interned.try_emplace(label, static_cast<ClassId>(names.size()));
    if (inserted) names.push_back(label);
    ids.push_back(it->second);
  }
  return EmbeddingSet(std::move(vectors), std::move(ids), std::move(names));
}

EmbeddingSet make_embedding_set(const std::vector<std::vector<double>>& vectors,
                                const std::vector<std::string>& labels) {
  if (vectors.empty()) throw DataError("embedding set: no rows");
  const std::size_t d = vectors.front().size();
  Matrix m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].size() != d) {
      throw DataError("embedding set: dimension mismatch at row " + std::to_string(r) +
                      " (expected " + std::to_string(d) + ", got " +
                      std::to_string(vectors[r].size()) + ")");
    }
    for (std::size_t c = 0; c < d; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vectors[r][c];
    }
  }
  return embedding_set_from_matrix(std::move(m), labels);
}

void EmbeddingStore::add(const std::string& label, std::span<const double> vector) {
  if (vector.empty()) throw DataError("store: empty vector for class '" + label + "'");
  const auto d = static_cast<Eigen::Index>(vector.size());
  if (!classes_.empty() && d != dim_) {
    throw DataError("store: vector of dimension " + std::to_string(d) + " in class '" + label +
                    "', expected " + std::to_string(dim_));
  }
  Eigen::Map<const Eigen::RowVectorXd> row(vector.data(), d);
  if (!row.allFinite()) throw DataError("store: non-finite value in class '" + label + "'");

  auto it = std::find_if(classes_.begin(), classes_.end(),
                         [&](const StoreClass& c) { return c.name == label; });
  if (it == classes_.end()) {
    classes_.push_back({label, Matrix(0, d)});
    it = std::prev(classes_.end());
    dim_ = d;
  }
  Matrix& m = it->vectors;
  m.conservativeResize(m.rows() + 1, Eigen::NoChange);
  m.row(m.rows() - 1) = row;
}

void EmbeddingStore::add_class(std::string name, Matrix vectors) {
  if (vectors.rows() < 1 || vectors.cols() < 1) {
    throw DataError("store: class '" + name + "' has no vectors");
  }
  if (!classes_.empty() && vectors.cols() != dim_) {
    throw DataError("store: class '" + name + "' has dimension " +
                    std::to_string(vectors.cols()) + ", expected " + std::to_string(dim_));
  }
  for (const auto& c : classes_) {
    if (c.name == name) throw DataError("store: duplicate class '" + name + "'");
  }
  require_finite(vectors, ("store class '" + name + "'").c_str());
  dim_ = vectors.cols();
  classes_.push_back({std::move(name), std::move(vectors)});
}

Eigen::Index EmbeddingStore::total_vectors() const {
  Eigen::Index n = 0;
  for (const auto& c : classes_) n += c.vectors.rows();
  return n;
}

EmbeddingSet EmbeddingStore::to_embedding_set() const {
  if (classes_.empty()) throw DataError("store: no classes");
  Matrix m(total_vectors(), dim_);
  std::vector<ClassId> ids;
  std::vector<std::string> names;
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& v = classes_[c].vectors;
    m.middleRows(row, v.rows()) = v;
    row += v.rows();
    ids.insert(ids.end(), static_cast<std::size_t>(v.rows()), static_cast<ClassId>(c));
    names.push_back(classes_[c].name);
  }
  return EmbeddingSet(std::move(m), std::move(ids), std::move(names));
}

void EpisodeSpec::validate() const {
  if (way < 2) throw ConfigError("episode: way must be >= 2 (got " + std::to_string(way) + ")");
  if (shot < 1) throw ConfigError("episode: shot must be >= 1");
  if (queries_per_class < 1) throw ConfigError("episode: queries per class must be >= 1");
}

namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<Eigen::Index> sample_without_replacement(Rng& rng, Eigen::Index n,
                                                     Eigen::Index count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace

Episode sample_episode(const EmbeddingStore& store, const EpisodeSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (store.class_count() < spec.way) {
    throw DataError("episode: store has " + std::to_string(store.class_count()) +
                    " classes, need " + std::to_string(spec.way));
  }
  Rng rng(seed);
  const auto chosen = sample_without_replacement(rng, store.class_count(), spec.way);
  const Eigen::Index per_class = spec.shot + spec.queries_per_class;

  Matrix support(Eigen::Index{spec.way} * spec.shot, store.dim());
  Matrix query(Eigen::Index{spec.way} * spec.queries_per_class, store.dim());
  std::vector<ClassId> support_labels;
  std::vector<ClassId> query_labels;
  std::vector<std::string> names;

  for (int c = 0; c < spec.way; ++c) {
    const StoreClass& cls = store.classes()[static_cast<std::size_t>(chosen[c])];
    if (cls.vectors.rows() < per_class) {
      throw DataError("episode: class '" + cls.name + "' has " +
                      std::to_string(cls.vectors.rows()) + " vectors, need " +
                      std::to_string(per_class));
    }
    const auto rows = sample_without_replacement(rng, cls.vectors.rows(), per_class);
    for (int s = 0; s < spec.shot; ++s) {
      support.row(Eigen::Index{c} * spec.shot + s) = cls.vectors.row(rows[s]);
      support_labels.push_back(c);
    }
    for (int q = 0; q < spec.queries_per_class; ++q) {
      query.row(Eigen::Index{c} * spec.queries_per_class + q) =
          cls.vectors.row(rows[spec.shot + q]);
      query_labels.push_back(c);
    }
    names.push_back(cls.name);
  }
  return Episode{EmbeddingSet(std::move(support), std::move(support_labels), names),
                 EmbeddingSet(std::move(query), std::move(query_labels), names), spec};
}

DistanceMatrix pairwise_distances(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (x.row(i) - x.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return DistanceMatrix(std::move(d));
}

NeighborSplit knn_split(const DistanceMatrix& d, std::span<const ClassId> labels, Eigen::Index i,
                        int k) {
  const Eigen::Index n = d.size();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DataError("knn: label count does not match distance matrix");
  }
  if (i < 0 || i >= n) throw DataError("knn: point index out of range");
  if (k < 1 || k > n - 1) {
    throw DataError("knn: k = " + std::to_string(k) + " out of range [1, " +
                    std::to_string(n - 1) + "]");
  }
  std::vector<Eigen::Index> others;
  others.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != i) others.push_back(j);
  }
  std::partial_sort(others.begin(), others.begin() + k, others.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      const double da = d(i, a), db = d(i, b);
                      return da < db || (da == db && a < b);
                    });

  NeighborSplit split;
  split.theta = d(i, others.front());
  split.alpha = d(i, others[static_cast<std::size_t>(k - 1)]);
  const ClassId own = labels[static_cast<std::size_t>(i)];
  for (int r = 0; r < k; ++r) {
    const Eigen::Index j = others[static_cast<std::size_t>(r)];
    Neighbor nb{j, d(i, j)};
    (labels[static_cast<std::size_t>(j)] == own ? split.same : split.diff).push_back(nb);
  }
  return split;
}

}  // namespace fsr
