#include <Eigen/Eigenvalues>

#include "fsr/errors.hpp"
#include "reducer_util.hpp"

namespace fsr::detail {

Matrix double_center(const Matrix& m) {
  const Vector row_mean = m.rowwise().mean();
  const Eigen::RowVectorXd col_mean = m.colwise().mean();
  const double grand = m.mean();
  Matrix out = m;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean;
  out.array() += grand;
  return out;
}

Matrix SpectralBasis::coordinates() const {
  return vectors * values.cwiseSqrt().asDiagonal();
}

SpectralBasis spectral_basis(const Matrix& symmetric, int target_dim) {
  const Eigen::Index n = symmetric.rows();
  SpectralBasis basis{Matrix::Zero(n, target_dim), Vector::Zero(target_dim)};
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
  if (eig.info() != Eigen::Success) throw DataError("eigendecomposition did not converge");

  // Eigen returns ascending order.
  const Vector& values = eig.eigenvalues();
  const double cutoff = kRankTolerance * std::max(1.0, std::abs(values(n - 1)));
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(n, target_dim); ++c) {
    const double lambda = values(n - 1 - c);
    if (lambda <= cutoff) break;
    const auto v = eig.eigenvectors().col(n - 1 - c);
    basis.vectors.col(c) = orientation(v) * v;
    basis.values(c) = lambda;
  }
  return basis;
}

}  // namespace fsr::detail
