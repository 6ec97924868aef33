#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace gaugelab {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr cd I_unit{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

inline Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Minkowski signature (-,+,...,+).
inline double eta(int mu) { return mu == 0 ? -1.0 : 1.0; }

inline Mat pauli(int which) {
  Mat s(2, 2);
  switch (which) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I_unit, I_unit, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: s = Mat::Identity(2, 2);
  }
  return s;
}

// Orthonormal basis (columns) of the null space of a, with relative singular value cut.
inline Mat null_space(const Mat& a, double rel_tol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace gaugelab
