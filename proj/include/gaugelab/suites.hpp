#pragma once

#include <random>
#include <string>

#include "greens_checks.hpp"
#include "phase_space.hpp"
#include "solutions.hpp"

namespace gaugelab {

namespace detail {

inline double relative(double gap, double scale) { return scale > 0.0 ? gap / scale : gap; }

// Random class touching many modes, so that two independent draws pair nontrivially.
inline Section dense_kernel_section(const GaugeTheory& th, std::mt19937_64& rng) {
  RandomSectionOptions opt;
  opt.modes = th.mode_count();
  return random_kernel_section(th, rng, opt);
}

// sup |L psi| / sup sum_j |A_j| |psi^(j)| for the gauge-fixed operator, sampled on a grid.
inline double ptilde_residual(const GaugeTheory& th, const Section& psi, const std::vector<double>& grid) {
  const GreenOperator g(th, Op::Ptilde);
  double worst = 0.0, scale = 0.0;
  for (const auto& [m, fn] : psi.modes)
    for (double t : grid) {
      const OperatorPoly l = g.coefficients(m, t);
      const auto jet = fn->jet(t, l.degree());
      double s = 0.0;
      for (int j = 0; j <= l.degree(); ++j) s += max_abs(l.coeff(j)) * jet[j].norm();
      scale = std::max(scale, s);
      worst = std::max(worst, l.apply(jet).norm());
    }
  return relative(worst, scale);
}

}  // namespace detail

// tau(f, h + P q) - tau(f, h) for random classes f, h and random compact q.
inline Report well_definedness_check(const GaugeTheory& th, int trials, std::uint64_t seed = 17) {
  Report rep;
  rep.title = "tau well-defined " + th.name;
  std::mt19937_64 rng(seed);
  const TauEvaluator ev(th);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section f = detail::dense_kernel_section(th, rng), h = detail::dense_kernel_section(th, rng);
    RandomSectionOptions opt;
    opt.modes = th.mode_count();
    const Section pq = apply(th, Op::P, random_section(th, th.V, rng, opt));
    const ClassMoments mf = ev.moments(f);
    const cd base = ev.value(mf, ev.moments(h));
    const cd shifted = ev.value(mf, ev.moments(combine(1.0, h, 1.0, pq)));
    worst = std::max(worst, detail::relative(std::abs(shifted - base), std::abs(base)));
  }
  rep.add("tau_shift_by_operator_image", worst, 1e-8);
  return rep;
}

// Lorenz gauge fixing of psi = G f + K eps, eps compact, so that Kdag psi = R eps != 0.
inline Report lorenz_check(const GaugeTheory& th, int trials, std::uint64_t seed = 19) {
  if (!th.gauge) throw NotAGaugeTheory("Lorenz gauge fixing needs a gauge generator K");
  Report rep;
  rep.title = "lorenz gauge " + th.name;
  std::mt19937_64 rng(seed);
  const auto grid = interior_grid(th.spacetime, 4);
  RandomSectionOptions wide;
  wide.degree = 4;
  double constraint = 0.0, wave = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section lorenz = solution(th, random_kernel_section(th, rng));
    const Section eps = random_section(th, th.W, rng, wide);
    const Section psi = combine(1.0, lorenz, 1.0, apply(th, Op::K, eps));
    const Section fixed = gauge_fix_lorenz(th, psi);
    constraint = std::max(constraint, sup_norm(apply(th, Op::Kdag, fixed), grid) / sup_norm(psi, grid));
    wave = std::max(wave, detail::ptilde_residual(th, fixed, grid));
  }
  rep.add("Kdag_after_fix", constraint, 1e-8);
  rep.add("Ptilde_after_fix", wave, 1e-8);
  return rep;
}

// <G f, G h>_Sol from the split route at two splittings against tau(f, h).
inline Report two_route_check(const GaugeTheory& th, int trials, std::uint64_t seed = 23) {
  Report rep;
  rep.title = "solution pairing routes " + th.name;
  std::mt19937_64 rng(seed);
  const TauEvaluator ev(th);
  double first = 0.0, second = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section f = detail::dense_kernel_section(th, rng), h = detail::dense_kernel_section(th, rng);
    const double t = ev.value(f, h).real();
    const Section psi1 = solution(th, f), psi2 = solution(th, h);
    first = std::max(first, detail::relative(std::abs(sol_pairing_split(th, psi1, psi2) - t), std::abs(t)));
    second = std::max(second, detail::relative(std::abs(sol_pairing_split(th, psi1, psi2, 3.0, 1.5) - t), std::abs(t)));
  }
  rep.add("split_equals_tau", first, 1e-8);
  rep.add("shifted_split_equals_tau", second, 1e-8);
  return rep;
}

// Green's formula on two Cauchy surfaces against the split route; first-order operators only.
inline Report surface_check(const GaugeTheory& th, int trials, std::uint64_t seed = 29) {
  Report rep;
  rep.title = "surface pairing " + th.name;
  std::mt19937_64 rng(seed);
  double conserved = 0.0, routes = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section psi1 = solution(th, detail::dense_kernel_section(th, rng));
    const Section psi2 = solution(th, detail::dense_kernel_section(th, rng));
    const double early = sol_pairing_surface(th, psi1, psi2, -5.0), late = sol_pairing_surface(th, psi1, psi2, 4.5);
    const double split = sol_pairing_split(th, psi1, psi2);
    conserved = std::max(conserved, detail::relative(std::abs(late - early), std::abs(early)));
    routes = std::max(routes, detail::relative(std::abs(split - early), std::abs(early)));
  }
  rep.add("surface_time_independent", conserved, 1e-8);
  rep.add("surface_equals_split", routes, 1e-8);
  return rep;
}

// Representatives supported in a late slab are class-equal to the original class.
inline Report time_slice_check(const GaugeTheory& th, const PhaseSpace& ps, int trials, double t_lo = 3.0,
                               double t_hi = 4.5, std::uint64_t seed = 31) {
  Report rep;
  rep.title = "time slice " + th.name;
  std::mt19937_64 rng(seed);
  double distance = 0.0, leak = 0.0;
  for (int i = 0; i < trials; ++i) {
    const ObservableClass f = make_class(th, random_kernel_section(th, rng));
    const Section slice = time_slice_representative(th, f, t_lo, t_hi);
    const Interval s = slice.support();
    leak = std::max({leak, t_lo - s.lo, s.hi - t_hi});
    distance = std::max(distance, class_distance(th, ps, slice, f.rep));
  }
  rep.add("slice_class_distance", distance, 1e-8);
  rep.add("slice_support_outside_slab", leak, 0.0);
  return rep;
}

struct SuiteOptions {
  int trials = 50;
  double T_scale = 2.0;
  std::uint64_t seed = 1;
};

// Operator identities, Green's pipelines and pairing routes for one model.
inline Report identity_suite(const GaugeTheory& th, const PhaseSpace& ps, const SuiteOptions& opt = {}) {
  Report rep;
  rep.title = "identity suite " + th.name;
  const int n = opt.trials;
  const std::uint64_t s = opt.seed;
  rep.merge(verify_axioms(th, n, s), "axioms.");
  if (th.gauge) {
    rep.merge(intertwining_check(th, n, s + 1), "intertwining.");
    rep.merge(lorenz_check(th, n, s + 2), "lorenz.");
    rep.merge(tau_T_independence(th, opt.T_scale, ps), "T_independence.");
  }
  rep.merge(skew_adjoint_check(th, n, true, s + 3), "skew.");
  rep.merge(well_definedness_check(th, n, s + 4), "well_defined.");
  rep.merge(two_route_check(th, n, s + 5), "two_route.");
  bool first_order = true;
  for (int m = 0; m < th.mode_count(); ++m) first_order = first_order && th.op(Op::P, m).order() == 1;
  if (first_order) rep.merge(surface_check(th, n, s + 6), "surface.");
  rep.merge(time_slice_check(th, ps, n, 3.0, 4.5, s + 7), "time_slice.");
  return rep;
}

}  // namespace gaugelab
