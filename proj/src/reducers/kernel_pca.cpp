#include "fsr/errors.hpp"
#include "fsr/reducers.hpp"
#include "reducer_util.hpp"

namespace fsr {

namespace detail {

Matrix rbf_cross_kernel(const Matrix& a, const Matrix& b, double gamma) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return k;
}

}  // namespace detail

Matrix kernel_pca(const Matrix& x, int target_dim, double rbf_gamma, bool* degenerate) {
  if (!(rbf_gamma > 0.0)) throw DataError("rbf gamma must be > 0");
  const Matrix gram = detail::rbf_cross_kernel(x, x, rbf_gamma);
  const detail::SpectralBasis basis =
      detail::spectral_basis(detail::double_center(gram), target_dim);
  if (degenerate != nullptr) *degenerate = basis.all_zero();
  return basis.coordinates();
}

}  // namespace fsr

namespace fsr::detail {

std::pair<Matrix, Matrix> kernel_pca_fit_apply(const Matrix& fit, const Matrix& apply,
                                               int target_dim, double gamma) {
  if (!(gamma > 0.0)) throw DataError("rbf gamma must be > 0");
  const Matrix gram = rbf_cross_kernel(fit, fit, gamma);
  const SpectralBasis basis = spectral_basis(double_center(gram), target_dim);

  // Center the cross kernel with the training statistics.
  Matrix cross = rbf_cross_kernel(apply, fit, gamma);
  const Eigen::RowVectorXd train_col_mean = gram.colwise().mean();
  const Vector cross_row_mean = cross.rowwise().mean();
  cross.rowwise() -= train_col_mean;
  cross.colwise() -= cross_row_mean;
  cross.array() += gram.mean();

  Matrix projected = Matrix::Zero(apply.rows(), target_dim);
  for (int c = 0; c < target_dim; ++c) {
    if (basis.values(c) > 0.0) {
      projected.col(c) = cross * basis.vectors.col(c) / std::sqrt(basis.values(c));
    }
  }
  return {basis.coordinates(), std::move(projected)};
}

}  // namespace fsr::detail
