#pragma once

#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "profile.hpp"
#include "theories.hpp"

namespace gaugelab {

namespace detail {

// Coefficients of b written over (denom, columns), flattened column-major.
inline Vec flatten(const BumpProfile& b, int denom, int columns) {
  const BumpProfile l = b.lifted(denom);
  if (l.coeffs().cols() > columns) throw InvalidArgument("coefficient block too small");
  Mat c = Mat::Zero(l.dim(), columns);
  c.leftCols(l.coeffs().cols()) = l.coeffs();
  return c.reshaped();
}

// Matrix of coefficient vector -> coefficients of op applied, on the family of bumps sharing
// window, denominator and degree with `shape`.
inline Mat family_operator_matrix(const OperatorPoly& op, const BumpProfile& shape) {
  const int dim = shape.dim(), cols = static_cast<int>(shape.coeffs().cols());
  const int n = dim * cols;
  std::vector<BumpProfile> images;
  int denom = shape.denom(), width = 1;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    images.push_back(BumpProfile(shape.center(), shape.halfwidth(), e.reshaped(dim, cols), shape.denom()).applied(op));
    denom = std::max(denom, images.back().denom());
  }
  for (const auto& im : images) width = std::max(width, static_cast<int>(im.lifted(denom).coeffs().cols()));
  Mat m(op.rows() * width, n);
  for (int i = 0; i < n; ++i) m.col(i) = flatten(images[i], denom, width);
  return m;
}

}  // namespace detail

// Relative size of Kdag f: |Kdag f| / sum_j |A_j| |f^(j)| in L2, maximised over modes.
inline double kernel_residual(const GaugeTheory& th, const Section& f) {
  if (!th.gauge) return 0.0;
  double worst = 0.0;
  for (const auto& [m, fn] : f.modes) {
    const OperatorPoly& kd = th.op(Op::Kdag, m);
    const Interval dom = fn->support();
    if (!dom.bounded()) throw InvalidArgument("kernel membership needs compact support");
    double num = 0.0;
    std::vector<double> der(kd.degree() + 1, 0.0);
    const auto rule = quadrature(dom.lo, dom.hi, fn->breakpoints());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto j = fn->jet(rule.nodes[q], kd.degree());
      num += rule.weights[q] * kd.apply(j).squaredNorm();
      for (int d = 0; d <= kd.degree(); ++d) der[d] += rule.weights[q] * j[d].squaredNorm();
    }
    double scale = 0.0;
    for (int d = 0; d <= kd.degree(); ++d) scale += max_abs(kd.coeff(d)) * std::sqrt(der[d]);
    if (scale > 0.0) worst = std::max(worst, std::sqrt(num) / scale);
  }
  return worst;
}

// Orthogonal projection (in coefficient space) of each bump mode of f onto the kernel of Kdag
// restricted to bumps of the same window, denominator and degree.
inline Section project_kernel(const GaugeTheory& th, const Section& f) {
  if (!th.gauge) return f;
  Section out;
  out.dim = f.dim;
  for (const auto& [m, fn] : f.modes) {
    const auto* b = dynamic_cast<const BumpProfile*>(fn.get());
    if (!b) throw InvalidArgument("kernel projection acts on the closed-form bump family");
    const Mat c = detail::family_operator_matrix(th.op(Op::Kdag, m), *b);
    const Mat z = null_space(c, 1e-12);
    if (z.cols() == 0) throw FamilyTooSmall("no nonzero bump of this shape lies in the kernel");
    const Vec v = b->coeffs().reshaped();
    const Vec p = z * (z.adjoint() * v);
    if (p.norm() <= 1e-12 * v.norm() && v.norm() > 0.0)
      throw FamilyTooSmall("projection annihilates the section within the family");
    out.modes[m] = make_fn<BumpProfile>(b->center(), b->halfwidth(), p.reshaped(b->dim(), b->coeffs().cols()),
                                        b->denom());
  }
  return out;
}

// Random compact section already projected into Ker(Kdag).
inline Section random_kernel_section(const GaugeTheory& th, std::mt19937_64& rng, RandomSectionOptions opt = {}) {
  if (th.gauge) opt.degree = std::max(opt.degree, 5);
  return project_kernel(th, random_section(th, th.V, rng, opt));
}

}  // namespace gaugelab
