#pragma once

#include <Eigen/Dense>

namespace charlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Standard complex structure on R^{2n}, ordered (x_1..x_n, y_1..y_n):
/// J = [[0, -I], [I, 0]].
inline Mat standard_J(int n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = -Mat::Identity(n, n);
  J.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return J;
}

/// Apply J without forming it.
inline Vec apply_J(const Vec& v) {
  const auto n = v.size() / 2;
  Vec out(v.size());
  out.head(n) = -v.tail(n);
  out.tail(n) = v.head(n);
  return out;
}

/// max-abs entry of R^T J R - J.
inline double symplectic_defect(const Mat& R) {
  const Mat J = standard_J(static_cast<int>(R.rows() / 2));
  return (R.transpose() * J * R - J).cwiseAbs().maxCoeff();
}

}  // namespace charlab
