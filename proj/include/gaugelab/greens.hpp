#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "errors.hpp"
#include "linalg.hpp"
#include "poly.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "theories.hpp"

namespace gaugelab {

// First-order form y' = A(t) y + B(t) f of an order-r mode equation, y = (u, u', ..., u^(r-1)).
class ModeKernel {
 public:
  virtual ~ModeKernel() = default;
  int field_dim() const { return n_; }
  int order() const { return r_; }
  int state_dim() const { return n_ * r_; }

  virtual bool constant() const = 0;
  virtual Mat generator(double t) const = 0;
  virtual Mat input(double t) const = 0;
  // U(t, 0) c and U(0, s) y.
  virtual Vec from_reference(double t, const Vec& c) const = 0;
  virtual Vec to_reference(double s, const Vec& y) const = 0;
  virtual Mat propagator(double t, double s) const = 0;
  // U(t, 0)^H y.
  virtual Vec from_reference_adjoint(double t, const Vec& y) const { return propagator(t, 0.0).adjoint() * y; }

  Vec reference_source(double s, const Vec& f) const { return to_reference(s, input(s) * f); }

 protected:
  int n_ = 0;
  int r_ = 0;
};

using KernelPtr = std::shared_ptr<const ModeKernel>;

class ConstantKernel final : public ModeKernel {
 public:
  enum class Method { eigen, nilpotent, expm };

  explicit ConstantKernel(const OperatorPoly& op) {
    r_ = op.order();
    n_ = op.rows();
    if (op.rows() != op.cols()) throw OperatorNotHyperbolic("operator is not square");
    if (r_ == 0) throw OperatorNotHyperbolic("operator has no time derivatives");
    const Mat lead = op.coeff(r_);
    Eigen::JacobiSVD<Mat> svd(lead);
    const auto& sv = svd.singularValues();
    if (sv(n_ - 1) <= 1e-10 * sv(0)) throw OperatorNotHyperbolic("leading time coefficient is singular");
    const Mat li = lead.inverse();
    const int ns = state_dim();
    a_ = Mat::Zero(ns, ns);
    for (int j = 0; j + 1 < r_; ++j) a_.block(j * n_, (j + 1) * n_, n_, n_) = Mat::Identity(n_, n_);
    for (int j = 0; j < r_; ++j) a_.block((r_ - 1) * n_, j * n_, n_, n_) = -li * op.coeff(j);
    b_ = Mat::Zero(ns, n_);
    b_.bottomRows(n_) = li;
    classify();
  }

  bool constant() const override { return true; }
  Mat generator(double) const override { return a_; }
  Mat input(double) const override { return b_; }
  Method method() const { return method_; }
  const Vec& eigenvalues() const { return lambda_; }

  Mat propagator(double t, double s) const override { return evolution(t - s); }
  Vec from_reference(double t, const Vec& c) const override { return apply_evolution(t, c); }
  Vec to_reference(double s, const Vec& y) const override { return apply_evolution(-s, y); }
  Vec from_reference_adjoint(double t, const Vec& y) const override {
    if (method_ == Method::eigen)
      return vinv_adj_ * ((lambda_ * t).array().exp().conjugate() * (v_adj_ * y).array()).matrix();
    return evolution(t).adjoint() * y;
  }

  Mat evolution(double tau) const {
    switch (method_) {
      case Method::eigen: return v_ * (lambda_ * tau).array().exp().matrix().asDiagonal() * vinv_;
      case Method::nilpotent: {
        Mat acc = Mat::Identity(state_dim(), state_dim());
        Mat term = acc;
        for (std::size_t j = 1; j < powers_.size(); ++j) {
          term = powers_[j] * (std::pow(tau, static_cast<double>(j)) / factorial(static_cast<int>(j)));
          acc += term;
        }
        return acc;
      }
      case Method::expm: return (a_ * tau).exp();
    }
    return {};
  }

 private:
  static double factorial(int j) {
    double f = 1.0;
    for (int i = 2; i <= j; ++i) f *= i;
    return f;
  }

  Vec apply_evolution(double tau, const Vec& x) const {
    if (method_ == Method::eigen) return v_ * ((lambda_ * tau).array().exp() * (vinv_ * x).array()).matrix();
    return evolution(tau) * x;
  }

  void classify() {
    const int ns = state_dim();
    const double scale = std::max(1.0, max_abs(a_));
    // Exactly nilpotent generators (resonant zero modes) get the terminating series.
    powers_ = {Mat::Identity(ns, ns)};
    Mat p = Mat::Identity(ns, ns);
    for (int j = 1; j <= ns; ++j) {
      p = p * a_;
      if (max_abs(p) <= 1e-14 * std::pow(scale, j)) {
        method_ = Method::nilpotent;
        return;
      }
      powers_.push_back(p);
    }
    powers_.clear();
    Eigen::ComplexEigenSolver<Mat> es(a_);
    if (es.info() == Eigen::Success) {
      const Mat v = es.eigenvectors();
      Eigen::JacobiSVD<Mat> svd(v);
      const auto& sv = svd.singularValues();
      if (sv(ns - 1) > 1e-8 * sv(0)) {
        const Mat vinv = v.inverse();
        const Mat rec = v * es.eigenvalues().asDiagonal() * vinv;
        if (max_abs(rec - a_) <= 1e-12 * scale) {
          v_ = v;
          vinv_ = vinv;
          v_adj_ = v.adjoint();
          vinv_adj_ = vinv.adjoint();
          lambda_ = es.eigenvalues();
          method_ = Method::eigen;
          return;
        }
      }
      lambda_ = es.eigenvalues();
    }
    method_ = Method::expm;
  }

  Mat a_, b_;
  Method method_ = Method::expm;
  Mat v_, vinv_, v_adj_, vinv_adj_;
  Vec lambda_;
  std::vector<Mat> powers_;
};

// Real time-dependent coefficients: fundamental matrix by adaptive Runge-Kutta-Fehlberg 7(8)
// from stored checkpoints.
class TimeDependentKernel final : public ModeKernel {
 public:
  TimeDependentKernel(std::function<OperatorPoly(double)> coeffs, double t_lo, double t_hi, double tolerance = 1e-13)
      : coeffs_(std::move(coeffs)), tol_(tolerance) {
    const OperatorPoly probe = coeffs_(0.5 * (t_lo + t_hi));
    r_ = probe.order();
    n_ = probe.rows();
    if (r_ == 0) throw OperatorNotHyperbolic("operator has no time derivatives");
    t0_ = std::floor(t_lo / spacing_) * spacing_ - spacing_;
    const int count = static_cast<int>(std::ceil((t_hi - t0_) / spacing_)) + 2;
    checkpoints_.assign(count, Mat());
    const int zero = static_cast<int>(std::lround(-t0_ / spacing_));
    const int ns = state_dim();
    checkpoints_[zero] = Mat::Identity(ns, ns);
    for (int j = zero + 1; j < count; ++j)
      checkpoints_[j] = evolve(checkpoints_[j - 1], time_of(j - 1), time_of(j));
    for (int j = zero - 1; j >= 0; --j)
      checkpoints_[j] = evolve(checkpoints_[j + 1], time_of(j + 1), time_of(j));
  }

  bool constant() const override { return false; }
  Mat generator(double t) const override {
    const OperatorPoly op = coeffs_(t);
    const Mat li = op.coeff(r_).inverse();
    const int ns = state_dim();
    Mat a = Mat::Zero(ns, ns);
    for (int j = 0; j + 1 < r_; ++j) a.block(j * n_, (j + 1) * n_, n_, n_) = Mat::Identity(n_, n_);
    for (int j = 0; j < r_; ++j) a.block((r_ - 1) * n_, j * n_, n_, n_) = -li * op.coeff(j);
    return a;
  }
  Mat input(double t) const override {
    Mat b = Mat::Zero(state_dim(), n_);
    b.bottomRows(n_) = coeffs_(t).coeff(r_).inverse();
    return b;
  }

  Mat fundamental(double t) const {
    const int j = std::clamp(static_cast<int>(std::lround((t - t0_) / spacing_)), 0,
                             static_cast<int>(checkpoints_.size()) - 1);
    return evolve(checkpoints_[j], time_of(j), t);
  }
  Mat propagator(double t, double s) const override { return fundamental(t) * fundamental(s).inverse(); }
  // U(t, s) integrated in one sweep, independent of the checkpoints.
  Mat direct_propagator(double t, double s) const {
    return evolve(Mat::Identity(state_dim(), state_dim()), s, t);
  }
  Vec from_reference(double t, const Vec& c) const override { return fundamental(t) * c; }
  Vec to_reference(double s, const Vec& y) const override { return fundamental(s).lu().solve(y); }

 private:
  double time_of(int j) const { return t0_ + j * spacing_; }

  Mat evolve(const Mat& x0, double from, double to) const {
    if (from == to) return x0;
    const int ns = state_dim();
    using State = std::vector<double>;
    State x(2 * ns * ns);
    for (int i = 0; i < ns * ns; ++i) {
      x[2 * i] = x0(i).real();
      x[2 * i + 1] = x0(i).imag();
    }
    auto rhs = [&](const State& s, State& ds, double t) {
      const Mat a = generator(t);
      Mat m(ns, ns);
      for (int i = 0; i < ns * ns; ++i) m(i) = cd(s[2 * i], s[2 * i + 1]);
      const Mat d = a * m;
      for (int i = 0; i < ns * ns; ++i) {
        ds[2 * i] = d(i).real();
        ds[2 * i + 1] = d(i).imag();
      }
    };
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(tol_, tol_, ode::runge_kutta_fehlberg78<State>());
    const double dt = (to > from ? 1.0 : -1.0) * 0.01;
    ode::integrate_adaptive(stepper, rhs, x, from, to, dt);
    Mat out(ns, ns);
    for (int i = 0; i < ns * ns; ++i) out(i) = cd(x[2 * i], x[2 * i + 1]);
    return out;
  }

  std::function<OperatorPoly(double)> coeffs_;
  double tol_;
  double spacing_ = 0.25;
  double t0_ = 0.0;
  std::vector<Mat> checkpoints_;
};

enum class GreenKind { retarded, advanced, causal };

// Duhamel solution of L u = sigma f for one mode; sigma = 1 for retarded/advanced, 0 for the
// causal propagator and for free evolution of a given reference state.
class DuhamelSolution final : public TimeFunction {
 public:
  DuhamelSolution(KernelPtr kernel, FunctionPtr source, GreenKind kind, double start = -std::numeric_limits<double>::infinity())
      : kernel_(std::move(kernel)), source_(std::move(source)), kind_(kind) {
    src_ = source_->support();
    src_.lo = std::max(src_.lo, start);
    source_breaks_ = source_->breakpoints();
    if (kind_ == GreenKind::retarded && !std::isfinite(src_.lo))
      throw InvalidArgument("retarded solution needs a source bounded in the past");
    if (kind_ == GreenKind::advanced && !std::isfinite(src_.hi))
      throw InvalidArgument("advanced solution needs a source bounded in the future");
    if (kind_ == GreenKind::causal && !src_.bounded()) throw InvalidArgument("causal propagator needs a compact source");
    if (src_.bounded()) full_ = reference_integral(src_.lo, src_.hi);
  }
  // Free evolution y(t) = U(t, 0) c.
  DuhamelSolution(KernelPtr kernel, Vec reference_state)
      : kernel_(std::move(kernel)), kind_(GreenKind::causal), free_(true), full_(std::move(reference_state)) {
    src_ = Interval{0.0, 0.0};
  }

  int dim() const override { return kernel_->field_dim(); }
  Interval support() const override {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind_) {
      case GreenKind::retarded: return {src_.lo, inf};
      case GreenKind::advanced: return {-inf, src_.hi};
      case GreenKind::causal: return {-inf, inf};
    }
    return {};
  }
  std::vector<double> breakpoints() const override {
    if (free_) return {};
    std::vector<double> out{src_.lo, src_.hi};
    for (double t : source_breaks_)
      if (src_.contains(t)) out.push_back(t);
    out.erase(std::remove_if(out.begin(), out.end(), [](double t) { return !std::isfinite(t); }), out.end());
    return out;
  }
  const Vec& reference_state() const { return full_; }
  const ModeKernel& kernel() const { return *kernel_; }

  Vec state(double t) const {
    const int ns = kernel_->state_dim();
    switch (kind_) {
      case GreenKind::causal: return kernel_->from_reference(t, full_);
      case GreenKind::retarded:
        if (t <= src_.lo) return Vec::Zero(ns);
        if (t >= src_.hi) return kernel_->from_reference(t, full_);
        return kernel_->from_reference(t, cumulative(t, src_.lo, +1.0));
      case GreenKind::advanced:
        if (t >= src_.hi) return Vec::Zero(ns);
        if (t <= src_.lo) return -kernel_->from_reference(t, full_);
        return -kernel_->from_reference(t, cumulative(t, src_.hi, -1.0));
    }
    return {};
  }

  std::vector<Vec> jet(double t, int order) const override {
    const int n = kernel_->field_dim(), r = kernel_->order();
    const Vec y = state(t);
    std::vector<Vec> out;
    for (int j = 0; j <= std::min(order, r - 1); ++j) out.push_back(y.segment(j * n, n));
    if (order < r) return out;
    const bool forced = !free_ && kind_ != GreenKind::causal && src_.contains(t);
    if (!kernel_->constant() && order > r)
      throw InvalidArgument("time-dependent kernels provide derivatives up to the operator order");
    std::vector<Vec> fj;
    if (forced) fj = source_->jet(t, order - r);
    const Mat a = kernel_->generator(t), b = kernel_->input(t);
    Vec yk = y;
    for (int i = 0; i <= order - r; ++i) {
      Vec next = a * yk;
      if (forced) next += b * fj[i];
      yk = next;
      out.push_back(yk.segment((r - 1) * n, n));
    }
    return out;
  }

 private:
  Vec reference_integral(double a, double b) const {
    if (!(b > a)) return Vec::Zero(kernel_->state_dim());
    return integrate([&](double s) { return Vec(kernel_->reference_source(s, source_->value(s))); }, a, b,
                     source_breaks_);
  }

  // Integral between the anchor and t, reusing partial integrals over whole panels from the anchor.
  Vec cumulative(double t, double anchor, double direction) const {
    const double reach = direction * (t - anchor);
    const auto whole = static_cast<std::size_t>(std::floor(reach / panel_));
    if (checkpoints_.empty()) checkpoints_.push_back(Vec::Zero(kernel_->state_dim()));
    while (checkpoints_.size() <= whole) {
      const double a = anchor + direction * panel_ * (checkpoints_.size() - 1);
      const double b = a + direction * panel_;
      checkpoints_.push_back(checkpoints_.back() + reference_integral(std::min(a, b), std::max(a, b)));
    }
    const double from = anchor + direction * panel_ * whole;
    return checkpoints_[whole] + reference_integral(std::min(from, t), std::max(from, t));
  }

  KernelPtr kernel_;
  FunctionPtr source_;
  GreenKind kind_;
  bool free_ = false;
  Interval src_;
  std::vector<double> source_breaks_;
  Vec full_;
  double panel_ = 2.0;
  mutable std::vector<Vec> checkpoints_;
};

// Green's operators of one catalogued operator, with the kernels of every mode built up front.
class GreenOperator {
 public:
  GreenOperator(const GaugeTheory& th, Op op) : op_(op) {
    if (th.gauge && op == Op::P)
      throw OperatorNotHyperbolic("P is not hyperbolic for a gauge theory; use Ptilde");
    if (!th.gauge && (op == Op::Q || op == Op::R))
      throw OperatorNotHyperbolic("matter models have no gauge operators");
    if (op == Op::K || op == Op::Kdag || op == Op::T) throw OperatorNotHyperbolic("not a catalogued wave operator");
    const Op eff = th.gauge ? op : Op::Ptilde;
    dim_ = th.source(eff).dim;
    if (th.time_dependent()) {
      for (int m = 0; m < th.mode_count(); ++m) {
        auto f = th.ptilde_at_time;
        auto c = [f, m](double t) { return f(m, t); };
        coeffs_.push_back(c);
        kernels_.push_back(std::make_shared<TimeDependentKernel>(c, th.spacetime.time.t_min - 2.0,
                                                                 th.spacetime.time.t_max + 2.0));
      }
    } else {
      for (int m = 0; m < th.mode_count(); ++m) {
        const OperatorPoly l = th.op(eff, m);
        coeffs_.push_back([l](double) { return l; });
        kernels_.push_back(std::make_shared<ConstantKernel>(l));
      }
    }
  }
  // Arbitrary per-mode constant-coefficient family (e.g. a formal adjoint).
  GreenOperator(std::vector<OperatorPoly> per_mode, Op label) : op_(label) {
    if (per_mode.empty()) throw InvalidArgument("no modes");
    dim_ = per_mode[0].cols();
    for (auto& l : per_mode) {
      kernels_.push_back(std::make_shared<ConstantKernel>(l));
      coeffs_.push_back([l](double) { return l; });
    }
  }

  Op op() const { return op_; }
  int dim() const { return dim_; }
  int mode_count() const { return static_cast<int>(kernels_.size()); }
  const KernelPtr& kernel(int mode) const { return kernels_.at(mode); }
  OperatorPoly coefficients(int mode, double t) const { return coeffs_.at(mode)(t); }

  Section apply(const Section& f, GreenKind kind, double start = -std::numeric_limits<double>::infinity()) const {
    if (f.dim != dim_) throw ShapeMismatch("section does not live on the operator fiber");
    Section out;
    out.dim = dim_;
    for (const auto& [m, fn] : f.modes) out.modes[m] = make_fn<DuhamelSolution>(kernels_.at(m), fn, kind, start);
    return out;
  }
  // Solution of the free equation with the given state (u, u', ...) at time t on each listed mode.
  Section free_solution(const std::map<int, Vec>& states, double t) const {
    Section out;
    out.dim = dim_;
    for (const auto& [m, y] : states)
      out.modes[m] = make_fn<DuhamelSolution>(kernels_.at(m), kernels_.at(m)->to_reference(t, y));
    return out;
  }

 private:
  Op op_;
  int dim_ = 0;
  std::vector<KernelPtr> kernels_;
  std::vector<std::function<OperatorPoly(double)>> coeffs_;
};

inline Section greens_apply(const GaugeTheory& th, Op op, const Section& f, GreenKind which) {
  if (which == GreenKind::causal) throw InvalidArgument("use causal_propagator");
  if (!f.support().bounded()) throw InvalidArgument("source must be compactly supported");
  return GreenOperator(th, op).apply(f, which);
}

inline Section causal_propagator(const GaugeTheory& th, Op op, const Section& f) {
  return GreenOperator(th, op).apply(f, GreenKind::causal);
}

// Eighth-order central differences of sampled values; independent of the Duhamel jets.
inline std::vector<Vec> finite_difference_jet(const TimeFunction& u, double t, int order, double h = 0.005) {
  static const double d1[9] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  static const double d2[9] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  if (order > 2) throw InvalidArgument("finite differences provided up to second order");
  std::vector<Vec> samples;
  for (int i = -4; i <= 4; ++i) samples.push_back(u.value(t + i * h));
  std::vector<Vec> out{samples[4]};
  if (order >= 1) {
    Vec acc = Vec::Zero(u.dim());
    for (int i = 0; i < 9; ++i) acc += d1[i] * samples[i];
    out.push_back(acc / h);
  }
  if (order >= 2) {
    Vec acc = Vec::Zero(u.dim());
    for (int i = 0; i < 9; ++i) acc += d2[i] * samples[i];
    out.push_back(acc / (h * h));
  }
  return out;
}

// sup_t |L u - f| / sup_t |f| over the sampling grid, with L u from finite differences.
inline double equation_residual(const GreenOperator& g, const Section& u, const Section& f, const std::vector<double>& grid) {
  double num = 0.0, den = 0.0;
  for (const auto& [m, un] : u.modes) {
    const auto fit = f.modes.find(m);
    for (double t : grid) {
      const OperatorPoly l = g.coefficients(m, t);
      const Vec lu = l.apply(finite_difference_jet(*un, t, l.degree()));
      const Vec fv = fit == f.modes.end() ? Vec::Zero(lu.size()) : Vec(fit->second->value(t));
      num = std::max(num, (lu - fv).cwiseAbs().maxCoeff());
      den = std::max(den, fv.size() ? fv.cwiseAbs().maxCoeff() : 0.0);
    }
  }
  return num / std::max(den, 1e-300);
}

inline double sup_norm(const Section& u, const std::vector<double>& grid) {
  double s = 0.0;
  for (const auto& [m, un] : u.modes)
    for (double t : grid) s = std::max(s, max_abs(un->value(t)));
  return s;
}

inline double sup_difference(const Section& a, const Section& b, const std::vector<double>& grid) {
  return sup_norm(combine(1.0, a, -1.0, b), grid);
}

// Interior sampling grid: the time grid minus a margin for finite-difference stencils.
inline std::vector<double> interior_grid(const Spacetime& st, int stride = 1) {
  std::vector<double> g;
  const auto pts = st.time.points();
  for (std::size_t i = 1; i + 1 < pts.size(); i += stride) g.push_back(pts[i]);
  return g;
}

}  // namespace gaugelab
