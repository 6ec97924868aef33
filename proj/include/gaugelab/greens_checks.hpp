#pragma once

#include <random>
#include <string>
#include <vector>

#include "family.hpp"
#include "greens.hpp"
#include "report.hpp"
#include "theories.hpp"

namespace gaugelab {

namespace detail {

inline double relative_gap(cd a, cd b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

inline std::vector<Op> catalogue(const GaugeTheory& th) {
  if (th.gauge) return {Op::Ptilde, Op::Q, Op::R};
  return {Op::Ptilde};
}

// Grid points strictly before / after the support of a section.
inline std::vector<double> grid_outside(const std::vector<double>& grid, const Interval& s, bool before) {
  std::vector<double> out;
  for (double t : grid)
    if (before ? t < s.lo : t > s.hi) out.push_back(t);
  return out;
}

}  // namespace detail

// Defining properties of the retarded/advanced Green's operators and of the causal propagator for
// every catalogued operator of the theory.
inline Report greens_check(const GaugeTheory& th, int trials, std::uint64_t seed = 7) {
  Report rep;
  rep.title = "greens " + th.name;
  std::mt19937_64 rng(seed);
  const auto grid = interior_grid(th.spacetime);
  for (Op op : detail::catalogue(th)) {
    const GreenOperator g(th, op);
    const FiberSpec& fiber = th.source(th.gauge ? op : Op::Ptilde);
    std::unique_ptr<GreenOperator> gadj;
    if (!th.time_dependent()) {
      std::vector<OperatorPoly> adj;
      for (int m = 0; m < th.mode_count(); ++m)
        adj.push_back(th.op(op, m).formal_adjoint(fiber.hermitian(), fiber.hermitian()));
      gadj = std::make_unique<GreenOperator>(std::move(adj), op);
    }
    double eq = 0.0, supp = 0.0, left_inv = 0.0, causal = 0.0, exact = 0.0, adjoint = 0.0;
    for (int i = 0; i < trials; ++i) {
      const Section f = random_section(th, fiber, rng);
      const Section gp = g.apply(f, GreenKind::retarded), gm = g.apply(f, GreenKind::advanced);
      eq = std::max({eq, equation_residual(g, gp, f, grid), equation_residual(g, gm, f, grid)});
      const double scale = sup_norm(gp, grid) + sup_norm(gm, grid);
      supp = std::max({supp, sup_norm(gp, detail::grid_outside(grid, f.support(), true)) / scale,
                       sup_norm(gm, detail::grid_outside(grid, f.support(), false)) / scale});
      const Section gc = g.apply(f, GreenKind::causal);
      Section zero;
      zero.dim = f.dim;
      causal = std::max(causal, equation_residual(g, gc, zero, grid) * sup_norm(zero, grid) +
                                    [&] {
                                      double worst = 0.0;
                                      for (const auto& [m, un] : gc.modes)
                                        for (double t : grid) {
                                          const OperatorPoly l = g.coefficients(m, t);
                                          worst = std::max(worst, max_abs(l.apply(finite_difference_jet(*un, t, l.degree()))));
                                        }
                                      return worst;
                                    }() / sup_norm(f, grid));
      // Compact h: G_+(L h) = h and G(L h) = 0.
      if (!th.time_dependent()) {
        const Section h = random_section(th, fiber, rng);
        const Section lh = apply(th, th.gauge ? op : Op::Ptilde, h);
        left_inv = std::max(left_inv, sup_difference(g.apply(lh, GreenKind::retarded), h, grid) / sup_norm(h, grid));
        left_inv = std::max(left_inv, sup_difference(g.apply(lh, GreenKind::advanced), h, grid) / sup_norm(h, grid));
        exact = std::max(exact, sup_norm(g.apply(lh, GreenKind::causal), grid) / sup_norm(h, grid));
        const Section f2 = random_section(th, fiber, rng);
        const cd a = pairing(th, fiber, gadj->apply(f2, GreenKind::advanced), h);
        const cd b = pairing(th, fiber, f2, g.apply(h, GreenKind::retarded));
        adjoint = std::max(adjoint, detail::relative_gap(a, b));
      }
    }
    const std::string p = std::string(op_name(op)) + "_";
    rep.add(p + "equation_residual", eq, 1e-8);
    rep.add(p + "one_sided_support", supp, 0.0);
    rep.add(p + "causal_solves_homogeneous", causal, 1e-8);
    if (!th.time_dependent()) {
      rep.add(p + "green_after_operator_is_identity", left_inv, 1e-8);
      rep.add(p + "causal_kills_operator_images", exact, 1e-8);
      rep.add(p + "adjoint_relation", adjoint, 1e-8);
    }
  }
  return rep;
}

inline Report intertwining_check(const GaugeTheory& th, int trials, std::uint64_t seed = 11) {
  if (!th.gauge) throw NotAGaugeTheory("intertwining needs a gauge generator K");
  Report rep;
  rep.title = "intertwining " + th.name;
  std::mt19937_64 rng(seed);
  const auto grid = interior_grid(th.spacetime, 2);
  const GreenOperator gp(th, Op::Ptilde), gq(th, Op::Q), gr(th, Op::R);
  double first = 0.0, second = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section f = random_section(th, th.V, rng);
    const Section h = random_section(th, th.W, rng);
    for (GreenKind kind : {GreenKind::retarded, GreenKind::advanced}) {
      const Section a = apply(th, Op::Kdag, gp.apply(f, kind));
      const Section b = gq.apply(apply(th, Op::Kdag, f), kind);
      first = std::max(first, sup_difference(a, b, grid) / sup_norm(b, grid));
      const Section c = apply(th, Op::K, gr.apply(h, kind));
      const Section d = gp.apply(apply(th, Op::T, h), kind);
      second = std::max(second, sup_difference(c, d, grid) / sup_norm(d, grid));
    }
  }
  rep.add("Kdag_G_Ptilde_eq_G_Q_Kdag", first, 1e-8);
  rep.add("K_G_R_eq_G_Ptilde_T", second, 1e-8);
  return rep;
}

// |<f, G h> + <G f, h>| relative to the size of the terms, for f, h in Ker(Kdag) (or unprojected
// sections when `project` is false, as a negative control).
inline Report skew_adjoint_check(const GaugeTheory& th, int trials, bool project = true, std::uint64_t seed = 13) {
  Report rep;
  rep.title = "skew-adjointness " + th.name;
  std::mt19937_64 rng(seed);
  const GreenOperator g(th, Op::Ptilde);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    RandomSectionOptions opt;
    opt.degree = 5;
    const Section f = project ? random_kernel_section(th, rng) : random_section(th, th.V, rng, opt);
    const Section h = project ? random_kernel_section(th, rng) : random_section(th, th.V, rng, opt);
    const cd a = pairing(th, th.V, f, g.apply(h, GreenKind::causal));
    const cd b = pairing(th, th.V, g.apply(f, GreenKind::causal), h);
    const double s = std::abs(a) + std::abs(b);
    worst = std::max(worst, s > 0.0 ? std::abs(a + b) / s : 0.0);
  }
  rep.add(project ? "skew_on_kernel" : "skew_unprojected", worst, 1e-8);
  return rep;
}

}  // namespace gaugelab
