#include <algorithm>
#include <limits>
#include <numeric>

#include "fsr/errors.hpp"
#include "fsr/reducers.hpp"
#include "reducer_util.hpp"

namespace fsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Symmetric kNN adjacency with Euclidean weights; kInf marks "no edge".
Matrix knn_graph(const DistanceMatrix& d, int n_neighbors) {
  const Eigen::Index n = d.size();
  Matrix w = Matrix::Constant(n, n, kInf);
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < n; ++i) {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    order.erase(order.begin() + i);
    std::partial_sort(order.begin(), order.begin() + n_neighbors, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
                      });
    for (int r = 0; r < n_neighbors; ++r) {
      const Eigen::Index j = order[static_cast<std::size_t>(r)];
      w(i, j) = d(i, j);
      w(j, i) = d(i, j);
    }
  }
  return w;
}

bool connected(const Matrix& w) {
  const Eigen::Index n = w.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!stack.empty()) {
    const Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (!seen[static_cast<std::size_t>(v)] && w(u, v) < kInf) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

// Dense Dijkstra from every source; O(n^3), fine for episode-sized graphs.
Matrix all_pairs_shortest_paths(const Matrix& w) {
  const Eigen::Index n = w.rows();
  Matrix g = Matrix::Constant(n, n, kInf);
  std::vector<char> done(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    std::fill(done.begin(), done.end(), 0);
    auto dist = g.row(s);
    dist(s) = 0.0;
    for (Eigen::Index step = 0; step < n; ++step) {
      Eigen::Index u = -1;
      for (Eigen::Index v = 0; v < n; ++v) {
        if (!done[static_cast<std::size_t>(v)] && (u < 0 || dist(v) < dist(u))) u = v;
      }
      if (dist(u) == kInf) break;
      done[static_cast<std::size_t>(u)] = 1;
      for (Eigen::Index v = 0; v < n; ++v) {
        const double cand = dist(u) + w(u, v);
        if (cand < dist(v)) dist(v) = cand;
      }
    }
  }
  // Path sums can differ in the last bit depending on direction.
  return (g + g.transpose()) * 0.5;
}

}  // namespace

GeodesicResult geodesic_distances(const Matrix& x, int n_neighbors) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("isomap: need at least two points");
  if (n_neighbors < 1 || n_neighbors >= n) {
    throw DataError("isomap: n_neighbors = " + std::to_string(n_neighbors) +
                    " must lie in [1, " + std::to_string(n - 1) + "]");
  }
  const DistanceMatrix d = pairwise_distances(x);
  int k = n_neighbors;
  Matrix w = knn_graph(d, k);
  while (!connected(w)) {
    // k = n - 1 is the complete graph, so this terminates.
    ++k;
    w = knn_graph(d, k);
  }
  GeodesicResult result{all_pairs_shortest_paths(w), k};
  if (!result.distances.allFinite()) {
    throw InternalError("isomap: non-finite geodesic on a connected graph");
  }
  return result;
}

Matrix classical_mds(const Matrix& distances, int target_dim) {
  const Matrix b = -0.5 * detail::double_center(distances.array().square().matrix());
  return detail::spectral_basis(b, target_dim).coordinates();
}

namespace detail {

// New points are attached to the fitted graph through their nearest fitted
// points and placed by landmark-MDS triangulation against the fitted
// geodesics, which reproduces the fitted coordinates for fitted points.
std::pair<Matrix, Matrix> isomap_fit_apply(const Matrix& fit, const Matrix& apply,
                                           int target_dim, int n_neighbors) {
  if (fit.rows() < target_dim + 1) {
    throw DataError("isomap: need at least target_dim + 1 = " + std::to_string(target_dim + 1) +
                    " points, got " + std::to_string(fit.rows()));
  }
  const GeodesicResult geo = geodesic_distances(fit, n_neighbors);
  const Matrix sq = geo.distances.array().square().matrix();
  const SpectralBasis basis = spectral_basis(-0.5 * double_center(sq), target_dim);
  const Eigen::RowVectorXd mean_sq = sq.colwise().mean();

  const Eigen::Index n = fit.rows();
  const int k = std::min<int>(geo.n_neighbors_used, static_cast<int>(n));
  Matrix projected = Matrix::Zero(apply.rows(), target_dim);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Vector edge(n);
  Eigen::RowVectorXd to_fit(n);
  for (Eigen::Index q = 0; q < apply.rows(); ++q) {
    for (Eigen::Index j = 0; j < n; ++j) edge(j) = (apply.row(q) - fit.row(j)).norm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return edge(a) < edge(b) || (edge(a) == edge(b) && a < b);
                      });
    to_fit.setConstant(kInf);
    for (int r = 0; r < k; ++r) {
      const Eigen::Index t = order[static_cast<std::size_t>(r)];
      to_fit = to_fit.cwiseMin((geo.distances.row(t).array() + edge(t)).matrix());
    }
    const Eigen::RowVectorXd delta = to_fit.array().square().matrix() - mean_sq;
    for (int c = 0; c < target_dim; ++c) {
      if (basis.values(c) > 0.0) {
        projected(q, c) = -0.5 * delta.dot(basis.vectors.col(c)) / std::sqrt(basis.values(c));
      }
    }
  }
  return {basis.coordinates(), std::move(projected)};
}

}  // namespace detail

Matrix isomap(const Matrix& x, int target_dim, int n_neighbors) {
  if (x.rows() < target_dim + 1) {
    throw DataError("isomap: need at least target_dim + 1 = " + std::to_string(target_dim + 1) +
                    " points, got " + std::to_string(x.rows()));
  }
  return classical_mds(geodesic_distances(x, n_neighbors).distances, target_dim);
}

}  // namespace fsr
