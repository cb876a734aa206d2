#pragma once

#include <algorithm>
#include <limits>

#include <Eigen/Dense>

namespace whatif {

template <typename Scalar>
struct LeverageProfile {
  Eigen::Index rank = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scores;
};

// Leverage scores of the rows of m: squared row norms of an orthonormal basis of
// its column space. Singular values below max(rows, cols) * eps * sigma_max count as zero.
template <typename Derived>
LeverageProfile<typename Derived::Scalar> leverage_scores(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  LeverageProfile<Scalar> out;
  out.scores.setZero(m.rows());
  if (m.rows() == 0 || m.cols() == 0) return out;

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == Scalar(0)) return out;
  const Scalar tol = static_cast<Scalar>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<Scalar>::epsilon() * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > tol) ++rank;
  out.rank = rank;
  out.scores = svd.matrixU().leftCols(rank).rowwise().squaredNorm();
  return out;
}

// Minimum-norm least-squares solution of a x ~ b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> min_norm_solve(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Matrix = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() == 0) return Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>::Zero(a.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

template <typename DerivedA, typename DerivedX, typename DerivedB>
typename DerivedA::Scalar residual_norm(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  return (a * x - b).norm();
}

}  // namespace whatif
