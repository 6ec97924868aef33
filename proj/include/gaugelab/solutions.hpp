#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "clifford.hpp"
#include "errors.hpp"
#include "greens.hpp"
#include "phase_space.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "theories.hpp"

namespace gaugelab {

// Causal solution G f of the gauge-fixed operator.
inline Section solution(const GaugeTheory& th, const Section& f) {
  return GreenOperator(th, Op::Ptilde).apply(f, GreenKind::causal);
}

namespace detail {

inline std::function<OperatorPoly(double)> p_coefficients(const GaugeTheory& th, int m) {
  if (th.time_dependent()) {
    auto f = th.ptilde_at_time;
    return [f, m](double t) { return f(m, t); };
  }
  const OperatorPoly l = th.op(Op::P, m);
  return [l](double) { return l; };
}

// |P psi| / sum_j |A_j| |psi^(j)| at the sample times.
inline double solution_residual(const GaugeTheory& th, const Section& psi, const std::vector<double>& times) {
  double worst = 0.0;
  for (const auto& [m, fn] : psi.modes) {
    const auto coeffs = p_coefficients(th, m);
    for (double t : times) {
      const OperatorPoly l = coeffs(t);
      const auto jet = fn->jet(t, l.degree());
      double scale = 0.0;
      for (int j = 0; j <= l.degree(); ++j) scale += max_abs(l.coeff(j)) * jet[j].norm();
      if (scale > 0.0) worst = std::max(worst, l.apply(jet).norm() / scale);
    }
  }
  return worst;
}

inline std::vector<double> sample_times(double lo, double hi, int n = 7) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(lo + (hi - lo) * (i + 0.5) / n);
  return t;
}

inline void require_solution(const GaugeTheory& th, const Section& psi, double lo, double hi, double tol = 1e-8) {
  if (psi.dim != th.V.dim) throw ShapeMismatch("solution must be a section of V");
  if (solution_residual(th, psi, sample_times(lo, hi)) > tol) throw NotASolution("section does not solve P");
}

// [P, chi] applied mode-wise, chi the smooth step over [lo, hi].
inline Section commutator(const GaugeTheory& th, const Section& psi, double lo, double hi) {
  auto step = std::make_shared<const SmoothStep>(lo, hi);
  Section out;
  out.dim = psi.dim;
  for (const auto& [m, fn] : psi.modes)
    out.modes[m] = make_fn<CommutatorFunction>(p_coefficients(th, m), !th.time_dependent(), psi.dim, step, fn);
  return out;
}

}  // namespace detail

// <P psi1^+, psi2> with psi1^+ = chi psi1 and chi rising from 0 to 1 across
// [t_split - half_width, t_split + half_width].
inline double sol_pairing_split(const GaugeTheory& th, const Section& psi1, const Section& psi2, double t_split = 0.0,
                                double half_width = 0.5) {
  const double lo = t_split - half_width, hi = t_split + half_width;
  detail::require_solution(th, psi1, lo, hi);
  detail::require_solution(th, psi2, lo, hi);
  return pairing(th, th.V, detail::commutator(th, psi1, lo, hi), psi2).real();
}

// Green's formula on the surface {t}: Vol rho(t) sum_k (A_1 psi1)^H M psi2 for P = A_1 d/dt + A_0.
inline double sol_pairing_surface(const GaugeTheory& th, const Section& psi1, const Section& psi2, double t) {
  const CauchySurfaceData surf = cauchy_surface(th.spacetime, t);
  const Mat herm = th.V.hermitian();
  cd total = 0.0;
  for (const auto& [m, fn] : psi1.modes) {
    const OperatorPoly l = detail::p_coefficients(th, m)(t);
    if (l.order() != 1) throw OperatorNotFirstOrder("surface formula needs a first-order operator");
    auto it = psi2.modes.find(m);
    if (it == psi2.modes.end()) continue;
    total += (l.coeff(1) * fn->value(t)).dot(herm * it->second->value(t));
  }
  return (total * th.volume() * surf.volume_density).real();
}

// psi + K eps with R eps = -Kdag psi and vanishing data for eps at `start`.
inline Section gauge_fix_lorenz(const GaugeTheory& th, const Section& psi, double start) {
  if (!th.gauge) return psi;
  const Section src = combine(-1.0, apply(th, Op::Kdag, psi), 0.0, Section{});
  const Section eps = GreenOperator(th, Op::R).apply(src, GreenKind::retarded, start);
  return combine(1.0, psi, 1.0, apply(th, Op::K, eps));
}

inline Section gauge_fix_lorenz(const GaugeTheory& th, const Section& psi) {
  return gauge_fix_lorenz(th, psi, th.spacetime.time.t_min - 1.0);
}

// Representative [P, chi] G f of [f] supported in the slab [t_lo, t_hi].
inline Section time_slice_representative(const GaugeTheory& th, const ObservableClass& f, double t_lo, double t_hi) {
  const TimeGrid& tg = th.spacetime.time;
  if (!(t_lo < t_hi) || t_lo <= tg.t_min || t_hi >= tg.t_max)
    throw InvalidArgument("slab must be a nonempty interval strictly inside the time window");
  if (t_hi - t_lo < 4.0 * tg.step()) throw InvalidArgument("slab narrower than the sampling resolution");
  return detail::commutator(th, solution(th, f.rep), t_lo, t_hi);
}

// Fiberwise B of the toy model.
inline Mat toy_flip_matrix(const GaugeTheory& th) {
  if (th.name != "toy_fermionic") throw WrongModel("fiber flip is defined for the toy fermionic model");
  const int D = th.spacetime.dim();
  return kron(symplectic_flip(th.W.dim / 2), Mat::Identity(D, D));
}

inline Section toy_flip(const GaugeTheory& th, const Section& f) { return transform(f, toy_flip_matrix(th)); }

// ------------------------------------------------------------------------------------------------
// Rarita-Schwinger gauge fixing.

namespace detail {

inline void require_rs(const GaugeTheory& th) {
  if (th.name != "rarita_schwinger" || !th.gamma) throw WrongModel("operation is specific to Rarita-Schwinger");
}

inline GreenOperator dirac_green(const GaugeTheory& th) {
  std::vector<OperatorPoly> ops;
  for (int m = 0; m < th.mode_count(); ++m) ops.push_back(dirac_operator(*th.gamma, th.lattice.momenta[m]));
  return GreenOperator(std::move(ops), Op::P);
}

}  // namespace detail

// gamma^mu psi_mu of a vector-spinor section.
inline Section gamma_trace(const GaugeTheory& th, const Section& psi) {
  detail::require_rs(th);
  return transform(psi, detail::gamma_trace_map(*th.gamma));
}

// psi + K eps with Dirac(eps) = (2/(D-2)) gamma^mu psi_mu, eps vanishing at `start`.
inline Section rs_gamma_trace_fix(const GaugeTheory& th, const Section& psi, double start) {
  detail::require_rs(th);
  const int D = th.spacetime.dim();
  Section src = transform(psi, detail::gamma_trace_map(*th.gamma) * (2.0 / (D - 2)));
  const Section eps = detail::dirac_green(th).apply(src, GreenKind::retarded, start);
  return combine(1.0, psi, 1.0, apply(th, Op::K, eps));
}

inline Section rs_gamma_trace_fix(const GaugeTheory& th, const Section& psi) {
  return rs_gamma_trace_fix(th, psi, th.spacetime.time.t_min - 1.0);
}

struct NoSolutionWitness {
  int mode = -1;
  std::vector<double> labels;
  double obstruction = 0.0;  // |gamma^i psi_i| on the zero mode
};

// Solves gamma^i d_i eps = -gamma^i psi_i on the surface {t}, evolves Dirac(eps) = 0 and returns
// psi + K eps, which has vanishing time component. Fails on a zero mode with nonzero obstruction.
inline std::variant<Section, NoSolutionWitness> rs_zero_component_fix(const GaugeTheory& th, const Section& psi, double t) {
  detail::require_rs(th);
  const GammaSet& g = *th.gamma;
  const int n = g.spinor_dim(), D = g.D;
  Mat spatial_trace = Mat::Zero(n, D * n);
  for (int i = 1; i < D; ++i) spatial_trace.middleCols(i * n, n) = g[i];
  std::map<int, Vec> data;
  for (const auto& [m, fn] : psi.modes) {
    const Vec value = fn->value(t);
    const Vec rhs = -(spatial_trace * value);
    const Mat s = I_unit * g.spatial_slash(th.lattice.momenta[m]);
    Eigen::JacobiSVD<Mat> svd(s);
    if (svd.singularValues()(n - 1) <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
      if (rhs.norm() > 1e-12 * std::max(1.0, value.norm()))
        return NoSolutionWitness{m, th.lattice.labels[m], rhs.norm()};
      data[m] = Vec::Zero(n);
    } else {
      data[m] = s.partialPivLu().solve(rhs);
    }
  }
  const Section eps = detail::dirac_green(th).free_solution(data, t);
  return combine(1.0, psi, 1.0, apply(th, Op::K, eps));
}

// Total kernel dimension of the spatial Dirac operator i gamma.k over the mode lattice.
inline int dirac_kernel_dim(const Spacetime& st, const SpinStructure& ss) {
  const GammaSet g = build_gamma(st.dim());
  const ModeLattice lat = mode_lattice(st, ss);
  int total = 0;
  for (const auto& k : lat.momenta) {
    Eigen::JacobiSVD<Mat> svd(I_unit * g.spatial_slash(k));
    const auto& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) <= 1e-12 * std::max(1.0, sv(0))) ++total;
  }
  return total;
}

enum class RsComponent { timelike, spatial_transverse };

// Constant solution on the zero mode: psi_0 = u (timelike) or psi_1 = u, psi_2 = -gamma^2 gamma^1 u
// (spatial, gamma-traceless).
inline Section rs_constant_solution(const GaugeTheory& th, const Vec& u, RsComponent component) {
  detail::require_rs(th);
  if (!th.spin.trivial() || th.lattice.zero < 0) throw InvalidArgument("constant modes need the trivial spin structure");
  const GammaSet& g = *th.gamma;
  const int n = g.spinor_dim(), D = g.D;
  if (u.size() != n) throw ShapeMismatch("spinor has the wrong dimension");
  if (majorana_reality_residual(u, g) > 1e-10 * std::max(1.0, u.norm())) throw NonMajoranaInput("spinor is not Majorana");
  Vec state = Vec::Zero(D * n);
  if (component == RsComponent::timelike) {
    state.head(n) = u;
  } else {
    state.segment(n, n) = u;
    state.segment(2 * n, n) = -(g[2] * g[1] * u);
  }
  return GreenOperator(th, Op::Ptilde).free_solution({{th.lattice.zero, state}}, 0.0);
}

inline double rs_constant_mode_pairing(const GaugeTheory& th, const Vec& u, RsComponent component) {
  const Section psi = rs_constant_solution(th, u, component);
  return sol_pairing_surface(th, psi, psi, 0.0);
}

// Surface pairing of the gamma-traceless vector-spinor matter model on constant-in-space data,
// evaluated from its first-order symbol and from the reduced expression
// sum_i psi_i^H psi_i - |gamma^i psi_i|^2.
inline Report projected_rs_indefiniteness(const Spacetime& st, const SpinStructure& ss) {
  detail::require_flat(st, "projected Rarita-Schwinger");
  Report rep;
  rep.title = "projected rarita-schwinger " + ss.label();
  const int D = st.dim();
  const GammaSet g = build_gamma(D);
  const int n = g.spinor_dim();
  const FiberSpec w = detail::majorana_fiber(g);
  const Mat herm = kron(detail::minkowski(D), w.hermitian());
  Mat symbol = kron(Mat::Identity(D, D), g[0]);
  for (int mu = 0; mu < D; ++mu) symbol.block(mu * n, 0, n, n) += (2.0 / D) * eta(mu) * g[mu];
  const double vol = st.volume();
  auto route_a = [&](const Vec& psi) { return vol * (symbol * psi).dot(herm * psi).real(); };
  auto route_b = [&](const Vec& psi) {
    Vec tr = Vec::Zero(n);
    double sq = 0.0;
    for (int i = 1; i < D; ++i) {
      sq += psi.segment(i * n, n).squaredNorm();
      tr += g[i] * psi.segment(i * n, n);
    }
    return vol * (sq - tr.squaredNorm());
  };
  // Time component from the constraint gamma^mu psi_mu = 0.
  auto complete = [&](Vec psi) {
    Vec tr = Vec::Zero(n);
    for (int i = 1; i < D; ++i) tr += g[i] * psi.segment(i * n, n);
    psi.head(n) = g[0] * tr;
    return psi;
  };
  const Vec chi = majorana_basis(g).front();
  Vec pos = Vec::Zero(D * n);
  pos.segment(n, n) = chi;
  if (D >= 3) pos.segment(2 * n, n) = -(g[2] * g[1] * chi);
  pos = complete(pos);
  Vec neg = Vec::Zero(D * n);
  for (int i = 1; i < D; ++i) neg.segment(i * n, n) = g[i] * chi;
  neg = complete(neg);
  const double pa = route_a(pos), pb = route_b(pos), na = route_a(neg), nb = route_b(neg);
  const double oracle = vol * (D - 1) * (2.0 - D) * chi.squaredNorm();
  const Vec constraint = detail::gamma_trace_map(g) * neg;
  rep.note("positive_value", pa);
  rep.note("negative_value", na);
  rep.note("negative_oracle", oracle);
  rep.add("constraint_residual", constraint.norm() / chi.norm(), 1e-12);
  rep.add("routes_agree_positive", std::abs(pa - pb) / std::abs(pb), 1e-12);
  rep.add("routes_agree_negative", std::abs(na - nb) / std::abs(nb), 1e-12);
  rep.add("negative_matches_fiber_oracle", std::abs(na - oracle) / std::abs(oracle), 1e-12);
  rep.add("positive_direction_found", pa > 0.0 ? 0.0 : 1.0, 0.0);
  rep.add("negative_direction_found", na < 0.0 ? 0.0 : 1.0, 0.0);
  return rep;
}

// ------------------------------------------------------------------------------------------------
// Independence of tau from the choice of T.

// Green-hyperbolic catalogue: invertible leading coefficient and a companion spectrum on the
// imaginary axis.
inline void require_catalogued(const OperatorPoly& l, const std::string& what) {
  std::unique_ptr<ConstantKernel> k;
  try {
    k = std::make_unique<ConstantKernel>(l);
  } catch (const OperatorNotHyperbolic& e) {
    throw CatalogueRejection(what + ": " + e.what());
  }
  for (const cd& lam : k->eigenvalues())
    if (std::abs(lam.real()) > 1e-6 * (1.0 + std::abs(lam)))
      throw CatalogueRejection(what + " has modes growing exponentially in time");
}

inline GaugeTheory with_scaled_T(const GaugeTheory& th, double scale) {
  if (!th.gauge) throw NotAGaugeTheory("T is only defined for gauge theories");
  GaugeTheory alt = th;
  for (auto& o : alt.ops) {
    o.T = o.T * cd(scale);
    o.derive();
  }
  for (int m = 0; m < alt.mode_count(); ++m) {
    require_catalogued(alt.op(Op::Ptilde, m), "Ptilde'");
    require_catalogued(alt.op(Op::Q, m), "Q'");
  }
  return alt;
}

inline Report tau_T_independence(const GaugeTheory& th, double scale, const PhaseSpace& ps) {
  const GaugeTheory alt = with_scaled_T(th, scale);
  Report rep;
  rep.title = "tau independent of T " + th.name;
  const TauEvaluator ev(alt);
  double gap = 0.0, size = 0.0;
  std::vector<ClassMoments> mom;
  for (const auto& b : ps.basis) mom.push_back(ev.moments(b.rep));
  for (const auto& blk : ps.blocks)
    for (int i : blk)
      for (int j : blk) {
        const double v = ev.value(mom[i], mom[j]).real();
        gap = std::max(gap, std::abs(v - ps.gram(i, j)));
        size = std::max(size, std::abs(ps.gram(i, j)));
      }
  rep.add("tau_prime_minus_tau", size > 0.0 ? gap / size : gap, 1e-8);
  rep.note("T_scale", scale);
  return rep;
}

}  // namespace gaugelab
