// Symmetric vectorization: diagonal entries first, then sqrt(2) times the
// strict upper triangle column by column, so that <A, B> = svec(A) . svec(B)
// for symmetric A and B.
#pragma once

#include <numbers>

#include <Eigen/Dense>

namespace qcs {

inline Eigen::Index svec_length(Eigen::Index order) { return order * (order + 1) / 2; }

/// Order q of the matrix whose packed length is `length`; throws if none.
Eigen::Index svec_order(Eigen::Index length);

template <typename Derived>
Eigen::VectorXd svec(const Eigen::MatrixBase<Derived>& expr) {
  // Product expressions would be re-evaluated per coefficient.
  const Eigen::MatrixXd X = expr;
  const Eigen::Index d = X.rows();
  Eigen::VectorXd v(svec_length(d));
  v.head(d) = X.diagonal();
  Eigen::Index k = d;
  for (Eigen::Index j = 1; j < d; ++j)
    for (Eigen::Index i = 0; i < j; ++i) v(k++) = std::numbers::sqrt2 * 0.5 * (X(i, j) + X(j, i));
  return v;
}

template <typename Derived>
Eigen::MatrixXd smat(const Eigen::MatrixBase<Derived>& v) {
  const Eigen::Index d = svec_order(v.size());
  Eigen::MatrixXd X(d, d);
  X.diagonal() = v.head(d);
  Eigen::Index k = d;
  for (Eigen::Index j = 1; j < d; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      const double value = v(k++) / std::numbers::sqrt2;
      X(i, j) = value;
      X(j, i) = value;
    }
  return X;
}

}  // namespace qcs
