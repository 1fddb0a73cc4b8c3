#include <limits>

#include "fsr/errors.hpp"
#include "fsr/reducers.hpp"

namespace fsr {

std::vector<int> agglomerate_features(const Matrix& x, int target_dim) {
  const Eigen::Index d = x.cols();
  if (target_dim < 1 || target_dim > d) {
    throw DataError("feature agglomeration: target_dim out of range");
  }
  // Cluster ids are the smallest member column; a merge folds the larger id
  // into the smaller one, so scanning ids in ascending order visits pairs in
  // the tie-break order.
  const Matrix cols = x.transpose();
  Matrix link = pairwise_distances(cols).values();
  std::vector<Eigen::Index> size(static_cast<std::size_t>(d), 1);
  std::vector<int> owner(static_cast<std::size_t>(d));
  std::vector<Eigen::Index> active(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    owner[static_cast<std::size_t>(c)] = static_cast<int>(c);
    active[static_cast<std::size_t>(c)] = c;
  }

  while (static_cast<Eigen::Index>(active.size()) > target_dim) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 1;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double v = link(active[i], active[j]);
        if (v < best) {
          best = v;
          ba = i;
          bb = j;
        }
      }
    }
    const Eigen::Index a = active[ba], b = active[bb];
    const auto na = static_cast<double>(size[static_cast<std::size_t>(a)]);
    const auto nb = static_cast<double>(size[static_cast<std::size_t>(b)]);
    // Average linkage update (exact for unweighted pair-group averages).
    for (const Eigen::Index c : active) {
      if (c == a || c == b) continue;
      const double v = (na * link(a, c) + nb * link(b, c)) / (na + nb);
      link(a, c) = v;
      link(c, a) = v;
    }
    size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
    for (auto& o : owner) {
      if (o == static_cast<int>(b)) o = static_cast<int>(a);
    }
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
  }

  std::vector<int> cluster_of_id(static_cast<std::size_t>(d), -1);
  for (std::size_t r = 0; r < active.size(); ++r) {
    cluster_of_id[static_cast<std::size_t>(active[r])] = static_cast<int>(r);
  }
  std::vector<int> assignment(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    assignment[static_cast<std::size_t>(c)] =
        cluster_of_id[static_cast<std::size_t>(owner[static_cast<std::size_t>(c)])];
  }
  return assignment;
}

Matrix feature_agglomeration(const Matrix& x, int target_dim) {
  const std::vector<int> assignment = agglomerate_features(x, target_dim);
  Matrix out = Matrix::Zero(x.rows(), target_dim);
  Vector counts = Vector::Zero(target_dim);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const int cluster = assignment[static_cast<std::size_t>(c)];
    out.col(cluster) += x.col(c);
    counts(cluster) += 1.0;
  }
  for (int j = 0; j < target_dim; ++j) out.col(j) /= counts(j);
  return out;
}

}  // namespace fsr
