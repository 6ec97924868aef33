#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "linalg.hpp"

namespace gaugelab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Double-exponential rule on [-1, 1]; exact to rounding for integrands analytic inside the
// interval, including flat bump endpoints.
inline const QuadratureRule& tanh_sinh_reference() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    constexpr double h = 0.03;
    constexpr int kmax = 106;
    for (int k = -kmax; k <= kmax; ++k) {
      const double u = k * h;
      const double s = 0.5 * pi * std::sinh(u);
      const double x = std::tanh(s);
      const double c = std::cosh(s);
      const double w = h * 0.5 * pi * std::cosh(u) / (c * c);
      if (std::abs(x) >= 1.0 || w < 1e-300) continue;
      r.nodes.push_back(x);
      r.weights.push_back(w);
    }
    return r;
  }();
  return rule;
}

}  // namespace detail

// Composite rule on [a, b] with panels no wider than max_panel.
inline QuadratureRule quadrature(double a, double b, double max_panel = 2.0) {
  QuadratureRule out;
  if (!(b > a)) return out;
  const auto& ref = detail::tanh_sinh_reference();
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel - 1e-12)));
  const double width = (b - a) / panels;
  out.nodes.reserve(panels * ref.size());
  out.weights.reserve(panels * ref.size());
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      out.nodes.push_back(lo + 0.5 * width * (ref.nodes[i] + 1.0));
      out.weights.push_back(0.5 * width * ref.weights[i]);
    }
  }
  return out;
}

// Composite rule split at the given breakpoints that fall strictly inside (a, b).
inline QuadratureRule quadrature(double a, double b, std::vector<double> breaks, double max_panel = 2.0) {
  QuadratureRule out;
  if (!(b > a)) return out;
  std::sort(breaks.begin(), breaks.end());
  double lo = a;
  auto append = [&](double hi) {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) return;
    const QuadratureRule piece = quadrature(lo, hi, max_panel);
    out.nodes.insert(out.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    out.weights.insert(out.weights.end(), piece.weights.begin(), piece.weights.end());
    lo = hi;
  };
  for (double t : breaks)
    if (t > a && t < b) append(t);
  append(b);
  return out;
}

template <typename F>
auto integrate_rule(F&& f, const QuadratureRule& rule, double a) {
  using R = decltype(f(a));
  if (rule.size() == 0) return R(f(a) * 0.0);
  R acc = f(rule.nodes[0]) * rule.weights[0];
  for (std::size_t i = 1; i < rule.size(); ++i) acc += f(rule.nodes[i]) * rule.weights[i];
  return acc;
}

template <typename F>
auto integrate(F&& f, double a, double b, const std::vector<double>& breaks, double max_panel = 2.0) {
  return integrate_rule(f, quadrature(a, b, breaks, max_panel), a);
}

template <typename F>
auto integrate(F&& f, double a, double b, double max_panel = 2.0) {
  const auto rule = quadrature(a, b, max_panel);
  using R = decltype(f(a));
  if (rule.size() == 0) return R(f(a) * 0.0);
  R acc = f(rule.nodes[0]) * rule.weights[0];
  for (std::size_t i = 1; i < rule.size(); ++i) acc += f(rule.nodes[i]) * rule.weights[i];
  return acc;
}

}  // namespace gaugelab
