#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsr/core.hpp"

namespace fsr {

enum class ReducerKind {
  identity,
  pca,
  truncated_svd,
  kernel_pca,
  isomap,
  feature_agglomeration,
  external,
};

const char* to_string(ReducerKind kind);
ReducerKind parse_reducer_kind(const std::string& name);  // throws ConfigError

struct ReducerSpec {
  ReducerKind kind = ReducerKind::identity;
  int target_dim = 6;
  std::optional<double> rbf_gamma;  // kernel_pca; unset = 1/d
  std::optional<int> n_neighbors;   // isomap; unset = max(shot + 1, 5), clamped to n - 1
  std::string command;              // external
  std::string label;                // external: display name, defaults to "external"

  // "identity", "pca-6", "umap-2", ...
  std::string name() const;
};

// Parses "kind[:key=value]..." e.g. "isomap:n_neighbors=8", "kernel_pca:gamma=0.1",
// "external:name=umap:command=python umap.py". `command=` consumes the rest
// of the string. Throws ConfigError.
ReducerSpec parse_reducer_spec(const std::string& text);

struct ReducedSet {
  Matrix vectors;  // row i corresponds to input row i
  ReducerSpec origin;
  Eigen::Index fit_row_count = 0;
  bool degenerate = false;  // e.g. zero centered Gram matrix in kernel PCA
};

// Options resolved from the episode rather than the ReducerSpec.
struct FitContext {
  int shot = 1;
};

// Dispatches to the kind-specific reducer. Deterministic given the inputs.
// Errors are rethrown as DataError prefixed with the reducer name.
ReducedSet fit_transform(const ReducerSpec& spec, const Matrix& x, std::uint64_t seed,
                         const FitContext& ctx = {});

// Rows reduced by a fit on one set, plus other rows mapped into that space.
struct ReducedSplit {
  Matrix fitted;
  Matrix applied;
};

// Fits on `fit_rows` and maps `apply_rows` out of sample (linear projection,
// kernel projection, or geodesic triangulation for isomap). External
// reducers have no out-of-sample map and fail with DataError.
ReducedSplit fit_apply(const ReducerSpec& spec, const Matrix& fit_rows, const Matrix& apply_rows,
                       std::uint64_t seed, const FitContext& ctx = {});

// Individual reducers. All return n x target_dim coordinates.
Matrix pca(const Matrix& x, int target_dim);
Matrix truncated_svd(const Matrix& x, int target_dim);
Matrix kernel_pca(const Matrix& x, int target_dim, double rbf_gamma, bool* degenerate = nullptr);
Matrix isomap(const Matrix& x, int target_dim, int n_neighbors);
Matrix feature_agglomeration(const Matrix& x, int target_dim);
Matrix external_reducer(const std::string& command, const Matrix& x, int target_dim,
                        std::uint64_t seed);

// Isomap building blocks, exposed for testing.
struct GeodesicResult {
  Matrix distances;
  int n_neighbors_used = 0;
};
GeodesicResult geodesic_distances(const Matrix& x, int n_neighbors);
Matrix classical_mds(const Matrix& distances, int target_dim);

// Cluster index (0..target_dim-1) of every column, clusters ordered by
// their smallest member column.
std::vector<int> agglomerate_features(const Matrix& x, int target_dim);

}  // namespace fsr
