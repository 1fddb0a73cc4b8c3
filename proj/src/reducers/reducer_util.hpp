#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "fsr/core.hpp"

namespace fsr {

// Relative cutoff below which singular values / eigenvalues count as zero.
inline constexpr double kRankTolerance = 1e-10;

namespace detail {

// +1 or -1 such that the largest-magnitude entry of `v` becomes positive
// (first such entry on exact ties).
template <typename Derived>
double orientation(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return v.size() > 0 && v(best) < 0.0 ? -1.0 : 1.0;
}

// Top eigenpairs of a symmetric matrix, descending, sign-normalized.
// Eigenvalues at or below the rank cutoff are stored as 0 with a zero vector.
struct SpectralBasis {
  Matrix vectors;  // n x target_dim, unit columns
  Vector values;   // target_dim

  // vectors * diag(sqrt(values))
  Matrix coordinates() const;
  bool all_zero() const { return (values.array() == 0.0).all(); }
};

SpectralBasis spectral_basis(const Matrix& symmetric, int target_dim);

// Double-centers a square matrix: J M J with J = I - 11^T / n.
Matrix double_center(const Matrix& m);

// Mean and top right-singular directions of the (optionally centered) data.
struct LinearBasis {
  Eigen::RowVectorXd mean;  // zero when not centering
  Matrix components;        // d x target_dim; zero columns past the rank

  Matrix project(const Matrix& x) const { return (x.rowwise() - mean) * components; }
};

LinearBasis linear_basis(const Matrix& x, int target_dim, bool center);

Matrix rbf_cross_kernel(const Matrix& a, const Matrix& b, double gamma);

// Reducers fitted on `fit` that also map `apply` rows into the fitted space.
std::pair<Matrix, Matrix> kernel_pca_fit_apply(const Matrix& fit, const Matrix& apply,
                                               int target_dim, double gamma);
std::pair<Matrix, Matrix> isomap_fit_apply(const Matrix& fit, const Matrix& apply,
                                           int target_dim, int n_neighbors);

}  // namespace detail
}  // namespace fsr
