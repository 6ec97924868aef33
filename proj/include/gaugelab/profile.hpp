#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "poly.hpp"
#include "quadrature.hpp"

namespace gaugelab {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool empty() const { return !(hi > lo); }
  bool contains(double t) const { return t >= lo && t <= hi; }
  Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
  Interval hull(const Interval& o) const { return {std::min(lo, o.lo), std::max(hi, o.hi)}; }
};

// A vector-valued function of time with derivatives on demand.
class TimeFunction {
 public:
  virtual ~TimeFunction() = default;
  virtual int dim() const = 0;
  virtual Interval support() const = 0;
  // Derivatives 0..order at t.
  virtual std::vector<Vec> jet(double t, int order) const = 0;
  virtual Vec value(double t) const { return jet(t, 0)[0]; }
  // Times where the function is not analytic; quadrature splits there.
  virtual std::vector<double> breakpoints() const {
    const Interval s = support();
    std::vector<double> out;
    if (std::isfinite(s.lo)) out.push_back(s.lo);
    if (std::isfinite(s.hi)) out.push_back(s.hi);
    return out;
  }
};

using FunctionPtr = std::shared_ptr<const TimeFunction>;

inline void append_breakpoints(std::vector<double>& out, const TimeFunction& f) {
  const auto b = f.breakpoints();
  out.insert(out.end(), b.begin(), b.end());
}

namespace detail {

// Rows of c are polynomials in x with ascending powers.
inline Mat poly_derivative(const Mat& c) {
  if (c.cols() <= 1) return Mat::Zero(c.rows(), 1);
  Mat d(c.rows(), c.cols() - 1);
  for (int p = 1; p < c.cols(); ++p) d.col(p - 1) = c.col(p) * static_cast<double>(p);
  return d;
}

// Multiply by sum_q f[q] x^q.
inline Mat poly_multiply(const Mat& c, const std::vector<double>& f) {
  Mat out = Mat::Zero(c.rows(), c.cols() + static_cast<int>(f.size()) - 1);
  for (int p = 0; p < c.cols(); ++p)
    for (std::size_t q = 0; q < f.size(); ++q)
      if (f[q] != 0.0) out.col(p + static_cast<int>(q)) += f[q] * c.col(p);
  return out;
}

inline Mat poly_add(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows(), std::max(a.cols(), b.cols()));
  out.leftCols(a.cols()) += a;
  out.leftCols(b.cols()) += b;
  return out;
}

inline Vec poly_eval(const Mat& c, double x) {
  Vec acc = c.col(c.cols() - 1);
  for (int p = static_cast<int>(c.cols()) - 2; p >= 0; --p) acc = acc * x + c.col(p);
  return acc;
}

}  // namespace detail

// exp(-1/(1-x^2)) N(x) / (1-x^2)^denom for x = (t - center)/halfwidth in (-1, 1), zero outside.
// Closed under d/dt and constant-coefficient operators.
class BumpProfile final : public TimeFunction {
 public:
  BumpProfile(double center, double halfwidth, Mat coeffs, int denom = 0)
      : center_(center), halfwidth_(halfwidth), denom_(denom), coeffs_(std::move(coeffs)) {
    if (!(halfwidth_ > 0.0)) throw InvalidArgument("bump halfwidth must be positive");
    if (coeffs_.cols() == 0) throw InvalidArgument("bump needs at least one coefficient");
  }
  static BumpProfile scalar(double center, double halfwidth, cd amplitude = 1.0) {
    Mat c(1, 1);
    c(0, 0) = amplitude;
    return BumpProfile(center, halfwidth, c);
  }

  int dim() const override { return static_cast<int>(coeffs_.rows()); }
  Interval support() const override { return {center_ - halfwidth_, center_ + halfwidth_}; }
  double center() const { return center_; }
  double halfwidth() const { return halfwidth_; }
  int denom() const { return denom_; }
  const Mat& coeffs() const { return coeffs_; }

  Vec value(double t) const override {
    const double x = (t - center_) / halfwidth_;
    const double u = 1.0 - x * x;
    if (!(u > 0.0)) return Vec::Zero(dim());
    const double envelope = std::exp(-1.0 / u - denom_ * std::log(u));
    return envelope * detail::poly_eval(coeffs_, x);
  }
  std::vector<Vec> jet(double t, int order) const override {
    std::vector<Vec> out;
    out.reserve(order + 1);
    out.push_back(value(t));
    BumpProfile p = *this;
    for (int j = 1; j <= order; ++j) {
      p = p.derivative();
      out.push_back(p.value(t));
    }
    return out;
  }

  BumpProfile derivative() const {
    // d/dx [b N u^-M] = b u^-(M+2) [N' u^2 + 2 M x u N - 2 x N], u = 1 - x^2.
    const double m = denom_;
    Mat term = detail::poly_multiply(detail::poly_derivative(coeffs_), {1.0, 0.0, -2.0, 0.0, 1.0});
    term = detail::poly_add(term, detail::poly_multiply(coeffs_, {0.0, 2.0 * m - 2.0, 0.0, -2.0 * m}));
    return BumpProfile(center_, halfwidth_, term / halfwidth_, denom_ + 2);
  }

  // Same function written over a larger denominator power.
  BumpProfile lifted(int denom) const {
    if (denom < denom_) throw InvalidArgument("cannot lower the denominator power");
    Mat c = coeffs_;
    for (int j = denom_; j < denom; ++j) c = detail::poly_multiply(c, {1.0, 0.0, -1.0});
    return BumpProfile(center_, halfwidth_, c, denom);
  }

  BumpProfile transformed(const Mat& l) const {
    if (l.cols() != dim()) throw ShapeMismatch("fiber map shape mismatch");
    return BumpProfile(center_, halfwidth_, l * coeffs_, denom_);
  }
  BumpProfile conjugated(const Mat& jm) const {
    return BumpProfile(center_, halfwidth_, jm * coeffs_.conjugate(), denom_);
  }
  BumpProfile scaled(cd s) const { return BumpProfile(center_, halfwidth_, coeffs_ * s, denom_); }

  bool same_window(const BumpProfile& o) const { return center_ == o.center_ && halfwidth_ == o.halfwidth_; }
  BumpProfile plus(const BumpProfile& o) const {
    if (!same_window(o)) throw InvalidArgument("bump sum requires a common window");
    const int m = std::max(denom_, o.denom_);
    return BumpProfile(center_, halfwidth_, detail::poly_add(lifted(m).coeffs_, o.lifted(m).coeffs_), m);
  }

  BumpProfile applied(const OperatorPoly& op) const {
    if (op.cols() != dim()) throw ShapeMismatch("operator does not act on this fiber");
    BumpProfile p = *this;
    BumpProfile acc = transformed(op.coeff(0));
    for (int j = 1; j <= op.degree(); ++j) {
      p = p.derivative();
      if (max_abs(op.coeff(j)) > 0.0) acc = acc.plus(p.transformed(op.coeff(j)));
    }
    return acc;
  }

 private:
  double center_;
  double halfwidth_;
  int denom_;
  Mat coeffs_;
};

// Smooth monotone step from 0 (before lo) to 1 (after hi); `complement` gives 1 - step.
class SmoothStep final : public TimeFunction {
 public:
  SmoothStep(double lo, double hi, bool complement = false)
      : lo_(lo), hi_(hi), complement_(complement),
        rate_(0.5 * (lo + hi), 0.5 * (hi - lo), Mat::Ones(1, 1)) {
    if (!(hi > lo)) throw InvalidArgument("step needs lo < hi");
    const double total = integrate([](double x) { return std::exp(-1.0 / (1.0 - x * x)); }, -1.0, 1.0);
    norm_ = 1.0 / (total * 0.5 * (hi - lo));
    rate_ = rate_.scaled(norm_ * (complement ? -1.0 : 1.0));
  }
  int dim() const override { return 1; }
  Interval support() const override {
    return complement_ ? Interval{-std::numeric_limits<double>::infinity(), hi_}
                       : Interval{lo_, std::numeric_limits<double>::infinity()};
  }
  std::vector<double> breakpoints() const override { return {lo_, hi_}; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool complement() const { return complement_; }
  // Derivative of the step as a bump.
  const BumpProfile& rate() const { return rate_; }

  double step_value(double t) const {
    double s;
    if (t <= lo_) s = 0.0;
    else if (t >= hi_) s = 1.0;
    else {
      const double h = 0.5 * (hi_ - lo_);
      s = integrate([&](double u) { return std::exp(-1.0 / (1.0 - u * u)); }, -1.0, (t - 0.5 * (lo_ + hi_)) / h) *
          norm_ * h;
    }
    return complement_ ? 1.0 - s : s;
  }
  std::vector<Vec> jet(double t, int order) const override {
    std::vector<Vec> out;
    out.push_back(Vec::Constant(1, step_value(t)));
    if (order >= 1) {
      auto r = rate_.jet(t, order - 1);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

 private:
  double lo_, hi_;
  bool complement_;
  BumpProfile rate_;
  double norm_ = 1.0;
};

// sum_i weight_i f_i
class SumFunction final : public TimeFunction {
 public:
  SumFunction(std::vector<std::pair<cd, FunctionPtr>> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw InvalidArgument("empty sum");
    for (const auto& t : terms_)
      if (t.second->dim() != terms_[0].second->dim()) throw ShapeMismatch("sum of differing fibers");
  }
  int dim() const override { return terms_[0].second->dim(); }
  Interval support() const override {
    Interval s = terms_[0].second->support();
    for (const auto& t : terms_) s = s.hull(t.second->support());
    return s;
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> out;
    for (const auto& t : terms_) append_breakpoints(out, *t.second);
    return out;
  }
  std::vector<Vec> jet(double t, int order) const override {
    std::vector<Vec> out(order + 1, Vec::Zero(dim()));
    for (const auto& [w, f] : terms_) {
      if (!f->support().contains(t)) continue;
      auto j = f->jet(t, order);
      for (int i = 0; i <= order; ++i) out[i] += w * j[i];
    }
    return out;
  }

 private:
  std::vector<std::pair<cd, FunctionPtr>> terms_;
};

// Scalar function times vector function, with Leibniz jets.
class ProductFunction final : public TimeFunction {
 public:
  ProductFunction(FunctionPtr scalar, FunctionPtr f) : scalar_(std::move(scalar)), f_(std::move(f)) {
    if (scalar_->dim() != 1) throw ShapeMismatch("cutoff factor must be scalar");
  }
  int dim() const override { return f_->dim(); }
  Interval support() const override { return scalar_->support().intersect(f_->support()); }
  std::vector<double> breakpoints() const override {
    std::vector<double> out = scalar_->breakpoints();
    append_breakpoints(out, *f_);
    return out;
  }
  std::vector<Vec> jet(double t, int order) const override {
    std::vector<Vec> out(order + 1, Vec::Zero(dim()));
    if (!support().contains(t)) return out;
    const auto a = scalar_->jet(t, order);
    const auto b = f_->jet(t, order);
    for (int n = 0; n <= order; ++n) {
      double binom = 1.0;
      for (int l = 0; l <= n; ++l) {
        out[n] += binom * a[l](0) * b[n - l];
        binom = binom * (n - l) / (l + 1);
      }
    }
    return out;
  }

 private:
  FunctionPtr scalar_;
  FunctionPtr f_;
};

// Constant-coefficient operator applied to f.
class AppliedFunction final : public TimeFunction {
 public:
  AppliedFunction(OperatorPoly op, FunctionPtr f) : op_(std::move(op)), f_(std::move(f)) {
    if (op_.cols() != f_->dim()) throw ShapeMismatch("operator does not act on this fiber");
  }
  int dim() const override { return op_.rows(); }
  Interval support() const override { return f_->support(); }
  std::vector<double> breakpoints() const override { return f_->breakpoints(); }
  std::vector<Vec> jet(double t, int order) const override {
    const auto j = f_->jet(t, order + op_.degree());
    std::vector<Vec> out;
    for (int n = 0; n <= order; ++n)
      out.push_back(op_.apply(std::vector<Vec>(j.begin() + n, j.end())));
    return out;
  }

 private:
  OperatorPoly op_;
  FunctionPtr f_;
};

// Instantaneous operator with time-dependent coefficients; values only.
class TimeDependentApplied final : public TimeFunction {
 public:
  TimeDependentApplied(std::function<OperatorPoly(double)> op, int rows, FunctionPtr f)
      : op_(std::move(op)), rows_(rows), f_(std::move(f)) {}
  int dim() const override { return rows_; }
  Interval support() const override { return f_->support(); }
  std::vector<double> breakpoints() const override { return f_->breakpoints(); }
  std::vector<Vec> jet(double t, int order) const override {
    if (order > 0) throw InvalidArgument("time-dependent operator images only provide values");
    const OperatorPoly l = op_(t);
    return {l.apply(f_->jet(t, l.degree()))};
  }

 private:
  std::function<OperatorPoly(double)> op_;
  int rows_;
  FunctionPtr f_;
};

// [L, step] f = L(step f) - step L f, supported where the step varies. The coefficients of L
// may depend on time; only values are provided in that case.
class CommutatorFunction final : public TimeFunction {
 public:
  CommutatorFunction(std::function<OperatorPoly(double)> op, bool constant, int rows,
                     std::shared_ptr<const SmoothStep> step, FunctionPtr f)
      : op_(std::move(op)), constant_(constant), rows_(rows), step_(std::move(step)), f_(std::move(f)) {}
  CommutatorFunction(const OperatorPoly& op, std::shared_ptr<const SmoothStep> step, FunctionPtr f)
      : CommutatorFunction([op](double) { return op; }, true, op.rows(), std::move(step), std::move(f)) {}
  int dim() const override { return rows_; }
  Interval support() const override { return Interval{step_->lo(), step_->hi()}.intersect(f_->support()); }
  std::vector<double> breakpoints() const override {
    std::vector<double> out = step_->breakpoints();
    append_breakpoints(out, *f_);
    return out;
  }
  std::vector<Vec> jet(double t, int order) const override {
    if (!constant_ && order > 0) throw InvalidArgument("time-dependent commutator provides values only");
    std::vector<Vec> out(order + 1, Vec::Zero(dim()));
    if (!support().contains(t)) return out;
    const OperatorPoly l = op_(t);
    const int r = l.degree();
    const auto a = step_->jet(t, order + r);
    const auto b = f_->jet(t, order + r);
    // n-th derivative of sum_j A_j sum_{l>=1} C(j,l) a^(l) b^(j-l).
    for (int n = 0; n <= order; ++n) {
      for (int j = 1; j <= r; ++j) {
        Vec term = Vec::Zero(f_->dim());
        for (int m = 0; m <= n; ++m)
          for (int q = 1; q <= j; ++q) term += binomial(n, m) * binomial(j, q) * a[q + m](0) * b[j - q + n - m];
        out[n] += l.coeff(j) * term;
      }
    }
    return out;
  }

 private:
  static double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
  }
  std::function<OperatorPoly(double)> op_;
  bool constant_;
  int rows_;
  std::shared_ptr<const SmoothStep> step_;
  FunctionPtr f_;
};

// Fixed fiber map, optionally antilinear: value = L f or L conj(f).
class MappedFunction final : public TimeFunction {
 public:
  MappedFunction(Mat l, FunctionPtr f, bool antilinear = false)
      : l_(std::move(l)), f_(std::move(f)), antilinear_(antilinear) {}
  int dim() const override { return static_cast<int>(l_.rows()); }
  Interval support() const override { return f_->support(); }
  std::vector<double> breakpoints() const override { return f_->breakpoints(); }
  std::vector<Vec> jet(double t, int order) const override {
    auto j = f_->jet(t, order);
    for (auto& v : j) v = antilinear_ ? Vec(l_ * v.conjugate()) : Vec(l_ * v);
    return j;
  }

 private:
  Mat l_;
  FunctionPtr f_;
  bool antilinear_;
};

// f restricted to a declared window; used where f is known to vanish outside it.
class RestrictedFunction final : public TimeFunction {
 public:
  RestrictedFunction(FunctionPtr f, Interval window) : f_(std::move(f)), window_(window) {}
  int dim() const override { return f_->dim(); }
  Interval support() const override { return window_.intersect(f_->support()); }
  std::vector<double> breakpoints() const override {
    std::vector<double> out = f_->breakpoints();
    for (double t : {window_.lo, window_.hi})
      if (std::isfinite(t)) out.push_back(t);
    return out;
  }
  std::vector<Vec> jet(double t, int order) const override {
    if (!support().contains(t)) return std::vector<Vec>(order + 1, Vec::Zero(dim()));
    return f_->jet(t, order);
  }
  const FunctionPtr& inner() const { return f_; }

 private:
  FunctionPtr f_;
  Interval window_;
};

template <typename T, typename... Args>
FunctionPtr make_fn(Args&&... args) {
  return std::make_shared<const T>(std::forward<Args>(args)...);
}

// A field configuration: time profile per spatial mode index.
struct Section {
  int dim = 0;
  std::map<int, FunctionPtr> modes;

  Interval support() const {
    Interval s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& [m, f] : modes) s = s.hull(f->support());
    return s;
  }
  bool empty() const { return modes.empty(); }
};

// Mode-wise sum a f + b h.
inline Section combine(cd a, const Section& f, cd b, const Section& h) {
  if (!f.empty() && !h.empty() && f.dim != h.dim) throw ShapeMismatch("sections over different fibers");
  Section out;
  out.dim = f.empty() ? h.dim : f.dim;
  std::map<int, std::vector<std::pair<cd, FunctionPtr>>> terms;
  for (const auto& [m, fn] : f.modes) terms[m].emplace_back(a, fn);
  for (const auto& [m, hn] : h.modes) terms[m].emplace_back(b, hn);
  for (auto& [m, t] : terms) out.modes[m] = make_fn<SumFunction>(std::move(t));
  return out;
}

}  // namespace gaugelab
