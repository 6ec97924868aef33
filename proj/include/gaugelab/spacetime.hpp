#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace gaugelab {

struct TimeGrid {
  double t_min = -8.0;
  double t_max = 8.0;
  int n_steps = 160;

  double step() const { return (t_max - t_min) / n_steps; }
  std::vector<double> points() const {
    std::vector<double> p(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) p[i] = t_min + i * step();
    return p;
  }
  bool contains(double t) const { return t >= t_min - 1e-12 && t <= t_max + 1e-12; }
};

// Circle lengths: the metric is -dt^2 + sum dx_i^2 with x_i periodic of period lengths[i].
struct FlatTorus {
  int D = 4;
  std::vector<double> lengths;
};

// -dt^2 + a(t)^2 dphi^2 with phi of period 2 pi.
struct FrwCircle {
  std::function<double(double)> scale;
  std::function<double(double)> scale_rate;
  std::string label;
};

inline FrwCircle frw_constant(double a0) {
  return {[a0](double) { return a0; }, [](double) { return 0.0; }, "constant"};
}

// a(t) = a0 + a1 tanh(t / duration); monotone expansion between a0 - a1 and a0 + a1.
inline FrwCircle frw_tanh_ramp(double a0, double a1, double duration) {
  if (a0 - std::abs(a1) <= 0.0 || duration <= 0.0)
    throw InvalidArgument("scale factor must stay positive");
  return {[=](double t) { return a0 + a1 * std::tanh(t / duration); },
          [=](double t) {
            const double c = std::cosh(t / duration);
            return a1 / (duration * c * c);
          },
          "tanh_ramp"};
}

struct Spacetime {
  std::variant<FlatTorus, FrwCircle> kind;
  int mode_cutoff = 2;
  TimeGrid time;

  bool is_flat() const { return std::holds_alternative<FlatTorus>(kind); }
  const FlatTorus& torus() const { return std::get<FlatTorus>(kind); }
  const FrwCircle& frw() const { return std::get<FrwCircle>(kind); }
  int dim() const { return is_flat() ? torus().D : 2; }
  int spatial_dim() const { return dim() - 1; }

  std::vector<double> lengths() const {
    return is_flat() ? torus().lengths : std::vector<double>{2.0 * pi};
  }
  // Coordinate volume of the spatial slice.
  double volume() const {
    double v = 1.0;
    for (double l : lengths()) v *= l;
    return v;
  }
  // Ratio of the induced spatial volume form to the coordinate one.
  double volume_density(double t) const { return is_flat() ? 1.0 : frw().scale(t); }
};

namespace detail {
inline void validate_common(int n, const TimeGrid& tg) {
  if (n < 1) throw InvalidArgument("mode cutoff must be at least 1");
  if (!(tg.t_min < tg.t_max) || tg.n_steps < 1) throw InvalidArgument("time grid must be strictly ordered");
}
}  // namespace detail

inline Spacetime make_flat_torus(int D, std::vector<double> lengths, int N, TimeGrid time = {}) {
  if (D < 2) throw InvalidArgument("invalid dimension " + std::to_string(D));
  if (lengths.empty()) lengths.assign(D - 1, 2.0 * pi);
  if (static_cast<int>(lengths.size()) != D - 1) throw ShapeMismatch("need D-1 circle lengths");
  for (double l : lengths)
    if (!(l > 0.0)) throw InvalidArgument("non-positive circle length");
  detail::validate_common(N, time);
  return {FlatTorus{D, std::move(lengths)}, N, time};
}

inline Spacetime make_frw_circle(FrwCircle scale, int N, TimeGrid time = {}) {
  detail::validate_common(N, time);
  for (double t : time.points())
    if (!(scale.scale(t) > 0.0)) throw InvalidArgument("scale factor must be positive");
  return {std::move(scale), N, time};
}

struct SpinStructure {
  std::vector<bool> periodic;

  bool trivial() const {
    for (bool p : periodic)
      if (!p) return false;
    return true;
  }
  std::string label() const {
    std::string s;
    for (bool p : periodic) s += p ? 'P' : 'A';
    return s;
  }
  static SpinStructure trivial_for(int D) { return {std::vector<bool>(D - 1, true)}; }
};

// All 2^(D-1) structures; bit i set means circle i is antiperiodic. Index 0 is the trivial one.
inline std::vector<SpinStructure> all_spin_structures(int D) {
  std::vector<SpinStructure> out;
  const int n = D - 1;
  for (int bits = 0; bits < (1 << n); ++bits) {
    SpinStructure s;
    for (int i = 0; i < n; ++i) s.periodic.push_back(((bits >> i) & 1) == 0);
    out.push_back(std::move(s));
  }
  return out;
}

struct ModeLattice {
  std::vector<RVec> momenta;
  std::vector<std::vector<double>> labels;  // integer or half-integer wave numbers per circle
  std::vector<int> negation;                // index of -k
  int zero = -1;

  int size() const { return static_cast<int>(momenta.size()); }
  double min_norm() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& k : momenta) m = std::min(m, k.norm());
    return m;
  }
};

// Periodic circles carry n in {-N..N}; antiperiodic circles carry n + 1/2 with |n + 1/2| <= N + 1/2.
inline ModeLattice mode_lattice(const Spacetime& st, const SpinStructure& ss) {
  const int n = st.spatial_dim();
  if (static_cast<int>(ss.periodic.size()) != n) throw ShapeMismatch("spin structure length must be D-1");
  const int N = st.mode_cutoff;
  std::vector<std::vector<double>> axis(n);
  for (int i = 0; i < n; ++i) {
    if (ss.periodic[i])
      for (int m = -N; m <= N; ++m) axis[i].push_back(m);
    else
      for (int m = -N - 1; m <= N; ++m) axis[i].push_back(m + 0.5);
  }
  const auto lengths = st.lengths();
  ModeLattice lat;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    std::vector<double> lab(n);
    RVec k(n);
    for (int i = 0; i < n; ++i) {
      lab[i] = axis[i][idx[i]];
      k(i) = 2.0 * pi * lab[i] / lengths[i];
    }
    if (k.norm() == 0.0) lat.zero = lat.size();
    lat.labels.push_back(lab);
    lat.momenta.push_back(k);
    int d = n - 1;
    while (d >= 0 && ++idx[d] == axis[d].size()) idx[d--] = 0;
    if (d < 0) break;
  }
  lat.negation.assign(lat.size(), -1);
  for (int a = 0; a < lat.size(); ++a)
    for (int b = 0; b < lat.size(); ++b)
      if ((lat.momenta[a] + lat.momenta[b]).norm() < 1e-12) lat.negation[a] = b;
  return lat;
}

struct CauchySurfaceData {
  double t;
  RVec normal;
  double volume_density;
};

inline CauchySurfaceData cauchy_surface(const Spacetime& st, double t) {
  if (!st.time.contains(t)) throw OutsideTimeGrid("surface time outside the time grid");
  RVec n = RVec::Zero(st.dim());
  n(0) = 1.0;
  return {t, n, st.volume_density(t)};
}

// Values of sum_k c_k exp(i k.x) on a uniform grid with `points` nodes per circle (row-major).
inline std::vector<cd> synthesize(const Spacetime& st, const ModeLattice& lat, const std::vector<cd>& coeffs,
                                  int points) {
  const int n = st.spatial_dim();
  const auto lengths = st.lengths();
  int total = 1;
  for (int i = 0; i < n; ++i) total *= points;
  std::vector<cd> out(total, 0.0);
  for (int p = 0; p < total; ++p) {
    RVec x(n);
    int rem = p;
    for (int i = n - 1; i >= 0; --i) {
      x(i) = lengths[i] * (rem % points) / points;
      rem /= points;
    }
    for (int m = 0; m < lat.size(); ++m) out[p] += coeffs[m] * std::exp(I_unit * lat.momenta[m].dot(x));
  }
  return out;
}

}  // namespace gaugelab
