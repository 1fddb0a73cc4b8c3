#include <algorithm>

#include <Eigen/SVD>

#include "fsr/reducers.hpp"
#include "reducer_util.hpp"

namespace fsr {

namespace detail {

LinearBasis linear_basis(const Matrix& x, int target_dim, bool center) {
  LinearBasis basis;
  basis.mean = center ? Eigen::RowVectorXd(x.colwise().mean())
                      : Eigen::RowVectorXd::Zero(x.cols());
  basis.components = Matrix::Zero(x.cols(), target_dim);
  const Matrix shifted = x.rowwise() - basis.mean;
  Eigen::BDCSVD<Matrix> svd(shifted, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(s.size(), target_dim); ++c) {
    if (top <= 0.0 || s(c) <= kRankTolerance * top) break;
    const auto v = svd.matrixV().col(c);
    basis.components.col(c) = orientation(v) * v;
  }
  return basis;
}

}  // namespace detail

Matrix pca(const Matrix& x, int target_dim) {
  return detail::linear_basis(x, target_dim, true).project(x);
}

Matrix truncated_svd(const Matrix& x, int target_dim) {
  return detail::linear_basis(x, target_dim, false).project(x);
}

}  // namespace fsr
