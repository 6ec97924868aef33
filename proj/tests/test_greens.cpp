#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>

#include "gaugelab/greens_checks.hpp"

using namespace gaugelab;

namespace {

Section unit_bump(int mode, double center = 0.0, double halfwidth = 1.0) {
  Section f;
  f.dim = 1;
  f.modes[mode] = make_fn<BumpProfile>(BumpProfile::scalar(center, halfwidth));
  return f;
}

double bump(double t, double center = 0.0, double halfwidth = 1.0) {
  const double x = (t - center) / halfwidth;
  return std::abs(x) < 1.0 ? std::exp(1.0 / (x * x - 1.0)) : 0.0;
}

// Retarded solution of u'' + w^2 u = b by Gauss-Kronrod quadrature of the closed-form kernel.
double oscillator_oracle(double t, double w) {
  const double hi = std::min(t, 1.0);
  if (hi <= -1.0) return 0.0;
  auto kernel = [&](double s) { return (w > 0.0 ? std::sin(w * (t - s)) / w : (t - s)) * bump(s); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(kernel, -1.0, hi, 15, 1e-14);
}

void expect_report_passes(const Report& rep) {
  EXPECT_FALSE(rep.checks.empty()) << rep.title;
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed()) << rep.title << " " << c.name << " = " << c.residual;
}

}  // namespace

TEST(Greens, OscillatorZeroModeMatchesClosedForm) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  const int z = th.lattice.zero;
  const Section u = greens_apply(th, Op::Ptilde, unit_bump(z), GreenKind::retarded);
  for (double t : {-0.5, 0.0, 0.3, 0.99, 2.0, 5.5}) {
    const double expect = oscillator_oracle(t, 1.0);
    EXPECT_NEAR(u.modes.at(z)->value(t)(0).real(), expect, 1e-8) << t;
    EXPECT_LE(std::abs(u.modes.at(z)->value(t)(0).imag()), 1e-12);
  }
}

TEST(Greens, AdvancedSolutionMirrorsRetarded) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  const int z = th.lattice.zero;
  const Section adv = greens_apply(th, Op::Ptilde, unit_bump(z), GreenKind::advanced);
  for (double t : {-4.0, -0.2, 0.4, 1.5}) EXPECT_NEAR(adv.modes.at(z)->value(t)(0).real(), oscillator_oracle(-t, 1.0), 1e-8);
}

TEST(Greens, MasslessResonantModeGrowsLinearly) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 0.0);
  const int z = th.lattice.zero;
  const Section u = greens_apply(th, Op::Ptilde, unit_bump(z), GreenKind::retarded);
  for (double t : {-0.5, 0.5, 3.0, 7.0}) EXPECT_NEAR(u.modes.at(z)->value(t)(0).real(), oscillator_oracle(t, 0.0), 1e-8);
  const double mass = oscillator_oracle(2.0, 0.0) - oscillator_oracle(1.0, 0.0);
  EXPECT_NEAR(u.modes.at(z)->value(6.0)(0).real() - u.modes.at(z)->value(5.0)(0).real(), mass, 1e-8);
  EXPECT_GT(mass, 0.1);
  EXPECT_LE(equation_residual(GreenOperator(th, Op::Ptilde), u, unit_bump(z), interior_grid(th.spacetime)), 1e-8);
}

TEST(Greens, RetardedSupportIsExactlyOneSided) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  const int z = th.lattice.zero;
  const Section f = unit_bump(z, 1.0, 0.5);
  const Section ret = greens_apply(th, Op::Ptilde, f, GreenKind::retarded);
  const Section adv = greens_apply(th, Op::Ptilde, f, GreenKind::advanced);
  for (double t = -8.0; t < 0.5; t += 0.05) EXPECT_EQ(ret.modes.at(z)->value(t).norm(), 0.0) << t;
  for (double t = 1.55; t <= 8.0; t += 0.05) EXPECT_EQ(adv.modes.at(z)->value(t).norm(), 0.0) << t;
}

TEST(Greens, CausalSolutionOnMovingModeIsNonzero) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  int moving = -1;
  for (int m = 0; m < th.mode_count(); ++m)
    if (std::abs(th.lattice.momenta[m].norm() - 1.0) < 1e-12) moving = m;
  ASSERT_GE(moving, 0);
  const Section f = unit_bump(moving);
  const Section g = causal_propagator(th, Op::Ptilde, f);
  const double w = std::sqrt(2.0);
  for (double t : {-3.0, 2.5, 6.0}) {
    const double expect = oscillator_oracle(t, w) - oscillator_oracle(-t, w);
    EXPECT_NEAR(g.modes.at(moving)->value(t)(0).real(), expect, 1e-8);
  }
  EXPECT_GT(sup_norm(g, interior_grid(th.spacetime)), 0.1);
}

TEST(Greens, CausalPropagatorKillsOperatorImages) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 2), 0.5);
  std::mt19937_64 rng(21);
  const auto grid = interior_grid(th.spacetime, 4);
  for (int i = 0; i < 3; ++i) {
    const Section h = random_section(th, th.V, rng);
    const Section g = causal_propagator(th, Op::Ptilde, apply(th, Op::Ptilde, h));
    EXPECT_LE(sup_norm(g, grid), 1e-8 * sup_norm(h, grid));
  }
}

TEST(Greens, FrwFundamentalMatricesCompose) {
  const GaugeTheory th = klein_gordon(make_frw_circle(frw_tanh_ramp(1.5, 0.5, 2.0), 2), 1.0);
  const GreenOperator g(th, Op::Ptilde);
  for (int m : {0, 2, 4}) {
    const auto& k = *g.kernel(m);
    for (auto [t, s, r] : {std::tuple{3.0, 0.5, -2.0}, std::tuple{-6.0, 1.0, 7.5}, std::tuple{0.0, 0.0, 4.0}}) {
      const Mat lhs = k.propagator(t, s) * k.propagator(s, r);
      EXPECT_LE(max_abs(lhs - k.propagator(t, r)), 1e-8 * std::max(1.0, max_abs(lhs)));
    }
  }
}

TEST(Greens, FrwConstantScaleMatchesFlatOscillator) {
  const GaugeTheory frw = klein_gordon(make_frw_circle(frw_constant(1.0), 1), 1.0);
  const GaugeTheory flat = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  const int z = flat.lattice.zero;
  const Section a = greens_apply(frw, Op::Ptilde, unit_bump(z), GreenKind::retarded);
  const Section b = greens_apply(flat, Op::Ptilde, unit_bump(z), GreenKind::retarded);
  for (double t : {0.0, 2.0, 6.0}) EXPECT_NEAR(std::abs(a.modes.at(z)->value(t)(0) - b.modes.at(z)->value(t)(0)), 0.0, 1e-8);
}

TEST(Greens, PIsRejectedForGaugeModels) {
  const GaugeTheory ym = yang_mills_linear(make_flat_torus(3, {}, 1));
  EXPECT_THROW(GreenOperator(ym, Op::P), OperatorNotHyperbolic);
  EXPECT_THROW(GreenOperator(ym, Op::K), OperatorNotHyperbolic);
  const GaugeTheory kg = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  EXPECT_THROW(GreenOperator(kg, Op::Q), OperatorNotHyperbolic);
  EXPECT_NO_THROW(GreenOperator(kg, Op::P));
}

TEST(Greens, CheckSuiteMatterModels) {
  expect_report_passes(greens_check(klein_gordon(make_flat_torus(2, {}, 2), 1.0), 2));
  expect_report_passes(greens_check(klein_gordon(make_flat_torus(2, {}, 2), 0.0), 2));
  expect_report_passes(greens_check(klein_gordon(make_frw_circle(frw_tanh_ramp(1.5, 0.5, 2.0), 1), 1.0), 1));
  expect_report_passes(greens_check(majorana_matter(make_flat_torus(3, {}, 1), SpinStructure::trivial_for(3), 0.5), 2));
}

TEST(Greens, CheckSuiteGaugeModels) {
  expect_report_passes(greens_check(yang_mills_linear(make_flat_torus(3, {}, 1)), 1));
  expect_report_passes(greens_check(toy_fermionic(make_flat_torus(3, {}, 1), 1), 1));
  expect_report_passes(greens_check(rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4)), 1));
}

TEST(Greens, IntertwiningForGaugeModels) {
  expect_report_passes(intertwining_check(yang_mills_linear(make_flat_torus(3, {}, 1)), 2));
  expect_report_passes(intertwining_check(rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{false, true, true}}), 1));
  EXPECT_THROW(intertwining_check(klein_gordon(make_flat_torus(2, {}, 1), 1.0), 1), NotAGaugeTheory);
}

TEST(Greens, SkewAdjointOnKernel) {
  expect_report_passes(skew_adjoint_check(klein_gordon(make_flat_torus(2, {}, 2), 1.0), 3));
  expect_report_passes(skew_adjoint_check(yang_mills_linear(make_flat_torus(3, {}, 1)), 2));
  expect_report_passes(skew_adjoint_check(rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4)), 2));
}

TEST(Greens, SkewAdjointFailsWithoutProjection) {
  const Report rep = skew_adjoint_check(rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4)), 2, false);
  ASSERT_EQ(rep.checks.size(), 1u);
  EXPECT_GT(rep.checks[0].residual, 1e-4);
}
