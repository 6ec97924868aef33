#pragma once

#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace gaugelab {

// Constant-coefficient matrix polynomial in d/dt: sum_j coeff(j) (d/dt)^j.
class OperatorPoly {
 public:
  OperatorPoly() = default;
  OperatorPoly(int rows, int cols) : rows_(rows), cols_(cols), coeffs_{Mat::Zero(rows, cols)} {}
  explicit OperatorPoly(std::vector<Mat> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw InvalidArgument("operator needs at least one coefficient");
    rows_ = static_cast<int>(coeffs_[0].rows());
    cols_ = static_cast<int>(coeffs_[0].cols());
    for (const auto& c : coeffs_)
      if (c.rows() != rows_ || c.cols() != cols_) throw ShapeMismatch("inconsistent coefficient shapes");
  }

  static OperatorPoly constant(const Mat& a) { return OperatorPoly(std::vector<Mat>{a}); }
  static OperatorPoly identity(int n) { return constant(Mat::Identity(n, n)); }
  static OperatorPoly zero(int rows, int cols) { return OperatorPoly(rows, cols); }
  // (d/dt)^power acting on an n-component field.
  static OperatorPoly time_derivative(int n, int power = 1) {
    std::vector<Mat> c(power + 1, Mat::Zero(n, n));
    c[power] = Mat::Identity(n, n);
    return OperatorPoly(std::move(c));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  // Highest power with a coefficient that is not identically zero.
  int order() const {
    for (int j = degree(); j > 0; --j)
      if (max_abs(coeffs_[j]) > 0.0) return j;
    return 0;
  }
  Mat coeff(int j) const { return j <= degree() ? coeffs_[j] : Mat::Zero(rows_, cols_); }
  Mat leading() const { return coeff(order()); }
  const std::vector<Mat>& coeffs() const { return coeffs_; }

  double norm() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, max_abs(c));
    return m;
  }

  OperatorPoly operator+(const OperatorPoly& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw ShapeMismatch("operator sum shape mismatch");
    std::vector<Mat> c(std::max(degree(), o.degree()) + 1);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = coeff(static_cast<int>(j)) + o.coeff(static_cast<int>(j));
    return OperatorPoly(std::move(c));
  }
  OperatorPoly operator-(const OperatorPoly& o) const { return *this + o * cd(-1.0); }
  OperatorPoly operator*(cd s) const {
    auto c = coeffs_;
    for (auto& m : c) m *= s;
    return OperatorPoly(std::move(c));
  }
  // Composition (*this) after o.
  OperatorPoly operator*(const OperatorPoly& o) const {
    if (cols_ != o.rows_) throw ShapeMismatch("operator composition shape mismatch");
    std::vector<Mat> c(degree() + o.degree() + 1, Mat::Zero(rows_, o.cols_));
    for (int i = 0; i <= degree(); ++i)
      for (int j = 0; j <= o.degree(); ++j) c[i + j] += coeffs_[i] * o.coeffs_[j];
    return OperatorPoly(std::move(c));
  }
  friend OperatorPoly operator*(const Mat& a, const OperatorPoly& p) { return constant(a) * p; }

  // a (x) p for a scalar-or-matrix polynomial p.
  friend OperatorPoly kron(const Mat& a, const OperatorPoly& p) {
    std::vector<Mat> c;
    for (const auto& m : p.coeffs_) c.push_back(kron(a, m));
    return OperatorPoly(std::move(c));
  }

  Vec apply(const std::vector<Vec>& jet) const {
    Vec out = Vec::Zero(rows_);
    for (int j = 0; j <= degree(); ++j) {
      if (j >= static_cast<int>(jet.size())) {
        if (max_abs(coeffs_[j]) > 0.0) throw InvalidArgument("jet too short for operator order");
        continue;
      }
      out += coeffs_[j] * jet[j];
    }
    return out;
  }

  // Formal adjoint for the pairings int u^H src_form v and int u^H tgt_form v.
  OperatorPoly formal_adjoint(const Mat& src_form, const Mat& tgt_form) const {
    const Mat sinv = src_form.inverse();
    std::vector<Mat> c;
    for (int j = 0; j <= degree(); ++j)
      c.push_back(((j % 2) ? -1.0 : 1.0) * sinv * coeffs_[j].adjoint() * tgt_form);
    return OperatorPoly(std::move(c));
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Mat> coeffs_;
};

// Symbol of the coordinate derivative d_mu on the spatial mode with momentum k.
inline OperatorPoly mode_derivative(int mu, const RVec& k) {
  if (mu == 0) return OperatorPoly::time_derivative(1);
  Mat c(1, 1);
  c(0, 0) = I_unit * k(mu - 1);
  return OperatorPoly::constant(c);
}

}  // namespace gaugelab
