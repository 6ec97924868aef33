#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>

#include "gaugelab/greens_checks.hpp"
#include "gaugelab/solutions.hpp"

using namespace gaugelab;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double bump(double t, double center, double halfwidth) {
  const double x = (t - center) / halfwidth;
  return std::abs(x) < 1.0 ? std::exp(1.0 / (x * x - 1.0)) : 0.0;
}

struct ScalarBump {
  double center, halfwidth;
  cd amp;
  double value(double t) const { return bump(t, center, halfwidth); }
};

// Fourier moments (int cos(w s) b, int sin(w s) b) of a bump by Gauss-Kronrod.
std::pair<cd, cd> oscillator_moments(const ScalarBump& b, double w) {
  const double lo = b.center - b.halfwidth, hi = b.center + b.halfwidth;
  const double c = GK::integrate([&](double s) { return std::cos(w * s) * b.value(s); }, lo, hi, 15, 1e-14);
  const double s = GK::integrate([&](double s) { return std::sin(w * s) * b.value(s); }, lo, hi, 15, 1e-14);
  return {b.amp * c, b.amp * s};
}

Section scalar_section(const std::map<int, ScalarBump>& parts) {
  Section f;
  f.dim = 1;
  for (const auto& [m, b] : parts) f.modes[m] = make_fn<BumpProfile>(BumpProfile::scalar(b.center, b.halfwidth, b.amp));
  return f;
}

int mode_with_label(const GaugeTheory& th, double label) {
  for (int m = 0; m < th.mode_count(); ++m)
    if (th.lattice.labels[m][0] == label) return m;
  return -1;
}

void expect_report_passes(const Report& rep) {
  EXPECT_FALSE(rep.checks.empty()) << rep.title;
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed()) << rep.title << " " << c.name << " = " << c.residual;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const std::vector<double> probe_times{-6.0, -2.5, 0.0, 1.7, 4.0, 6.5};

}  // namespace

TEST(PhaseSpace, ProjectionIsIdentityWithoutGauge) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  std::mt19937_64 rng(1);
  const Section f = random_section(th, th.V, rng);
  const Section p = project_kernel(th, f);
  for (const auto& [m, fn] : f.modes) EXPECT_EQ(p.modes.at(m).get(), fn.get());
}

TEST(PhaseSpace, TransverseYangMillsSectionUnchangedByProjection) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(3, {}, 1));
  int m = -1;
  for (int i = 0; i < th.mode_count(); ++i)
    if (th.lattice.labels[i][0] == 1.0 && th.lattice.labels[i][1] == 0.0) m = i;
  ASSERT_GE(m, 0);
  Mat c = Mat::Zero(9, 6);
  c(0 * 3 + 2, 0) = 1.0;
  c(0 * 3 + 2, 3) = 0.5;
  c(2 * 3 + 2, 1) = -0.25;
  Section f;
  f.dim = 9;
  f.modes[m] = make_fn<BumpProfile>(0.0, 1.0, c);
  EXPECT_LE(kernel_residual(th, f), 1e-14);
  const Section p = project_kernel(th, f);
  const auto* b = dynamic_cast<const BumpProfile*>(p.modes.at(m).get());
  ASSERT_NE(b, nullptr);
  EXPECT_LE(max_abs(b->coeffs() - c), 1e-12);
}

TEST(PhaseSpace, ProjectedGaugeModeSatisfiesConstraint) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(3, {}, 1));
  std::mt19937_64 rng(2);
  RandomSectionOptions opt;
  opt.degree = 5;
  const Section eps = random_section(th, th.W, rng, opt);
  const Section ke = apply(th, Op::K, eps);
  EXPECT_GT(kernel_residual(th, ke), 1e-3);
  const Section p = project_kernel(th, ke);
  EXPECT_LE(kernel_residual(th, p), 1e-10);
  EXPECT_GT(l2_norm(th, p), 1e-6 * l2_norm(th, ke));
}

TEST(PhaseSpace, ClassMembershipEnforced) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(3, {}, 1));
  std::mt19937_64 rng(3);
  EXPECT_THROW(make_class(th, random_section(th, th.V, rng)), KernelMembershipViolation);
  EXPECT_NO_THROW(make_class(th, random_kernel_section(th, rng)));
}

TEST(PhaseSpace, KleinGordonTauMatchesOscillatorOracleAndWronskian) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  const int z = th.lattice.zero, up = mode_with_label(th, 1.0), down = mode_with_label(th, -1.0);
  const cd a(0.8, -0.3), b(-0.2, 1.1);
  const std::map<int, ScalarBump> fp{{z, {-1.0, 1.0, 1.0}}, {up, {0.4, 0.9, a}}, {down, {0.4, 0.9, std::conj(a)}}};
  const std::map<int, ScalarBump> hp{{z, {1.5, 0.7, -0.6}}, {up, {-0.5, 1.2, b}}, {down, {-0.5, 1.2, std::conj(b)}}};
  const Section f = scalar_section(fp), h = scalar_section(hp);

  cd oracle = 0.0, wronskian = 0.0;
  const double t_surface = 3.3;
  for (const auto& [m, fb] : fp) {
    const double w = std::sqrt(1.0 + th.lattice.momenta[m].squaredNorm());
    const auto [cf, sf] = oscillator_moments(fb, w);
    const auto [ch, sh] = oscillator_moments(hp.at(m), w);
    oracle += (std::conj(sf) * ch - std::conj(cf) * sh) / w;
    auto sol = [&](cd c, cd s) { return (std::sin(w * t_surface) * c - std::cos(w * t_surface) * s) / w; };
    auto vel = [&](cd c, cd s) { return std::cos(w * t_surface) * c + std::sin(w * t_surface) * s; };
    wronskian += std::conj(vel(cf, sf)) * sol(ch, sh) - std::conj(sol(cf, sf)) * vel(ch, sh);
  }
  oracle *= th.volume();
  wronskian *= th.volume();
  EXPECT_LE(std::abs(oracle.imag()), 1e-12);
  EXPECT_LE(std::abs(oracle - wronskian), 1e-10 * std::abs(oracle));
  const double value = tau(th, make_class(th, f), make_class(th, h));
  EXPECT_LE(rel(value, oracle.real()), 1e-8);
  EXPECT_LE(rel(tau_direct(th, f, h).real(), oracle.real()), 1e-8);
  EXPECT_LE(rel(sol_pairing_split(th, solution(th, f), solution(th, h)), oracle.real()), 1e-8);
  EXPECT_LE(rel(tau(th, make_class(th, h), make_class(th, f)), -oracle.real()), 1e-8);
  EXPECT_LE(std::abs(tau(th, make_class(th, f), make_class(th, f))), 1e-10 * std::abs(oracle));
}

TEST(PhaseSpace, TauVanishesOnOperatorImages) {
  std::mt19937_64 rng(4);
  auto check = [&](const GaugeTheory& th, int trials) {
    const TauEvaluator ev(th);
    for (int i = 0; i < trials; ++i) {
      RandomSectionOptions opt;
      opt.modes = th.mode_count();
      opt.degree = 5;
      const Section f = random_kernel_section(th, rng, opt);
      const Section q = random_section(th, th.V, rng, opt);
      const Section pq = apply(th, Op::P, q);
      const double scale = std::abs(ev.value(f, f)) + std::abs(ev.value(f, project_kernel(th, q)));
      ASSERT_GT(scale, 0.0);
      EXPECT_LE(std::abs(ev.value(f, pq)), 1e-8 * scale) << th.name;
      EXPECT_LE(std::abs(ev.value(pq, f)), 1e-8 * scale) << th.name;
    }
  };
  check(klein_gordon(make_flat_torus(2, {}, 1), 0.7), 3);
  check(yang_mills_linear(make_flat_torus(3, {}, 1)), 2);
  check(majorana_matter(make_flat_torus(3, {}, 1), SpinStructure{{false, true}}, 0.0), 2);
}

TEST(PhaseSpace, GramStatisticsAndSignatures) {
  const PhaseSpace kg = build_phase_space(klein_gordon(make_flat_torus(2, {}, 2), 1.0));
  EXPECT_EQ(kg.size(), 10);
  EXPECT_LE(kg.statistics_residual, 1e-8);
  EXPECT_EQ(kg.signature.null, 0);
  for (int i = 0; i < kg.size(); ++i) EXPECT_LE(std::abs(kg.gram(i, i)), 1e-10);

  const GaugeTheory maj = majorana_matter(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4), 0.0);
  const PhaseSpace mps = build_phase_space(maj);
  EXPECT_EQ(mps.signature.positive, mps.size());
  EXPECT_TRUE(mps.positive_definite());
  EXPECT_LE(mps.statistics_residual, 1e-8);
  EXPECT_FALSE(negative_norm_witness(maj, mps).has_value());

  for (int D : {2, 3}) {
    const PhaseSpace ym = build_phase_space(yang_mills_linear(make_flat_torus(D, {}, 1)));
    EXPECT_GT(ym.size(), 0);
    EXPECT_EQ(ym.signature.null, 0) << "D=" << D;
    EXPECT_EQ(ym.signature.positive + ym.signature.negative + ym.signature.null, ym.size());
  }
}

TEST(PhaseSpace, GramAssemblyRoutesAgree) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(2, {}, 1));
  const PhaseSpace ps = build_phase_space(th);
  EXPECT_LE(ps.assembly_gap, 1e-8 * ps.gram.cwiseAbs().maxCoeff());
  for (int i = 0; i < std::min(ps.size(), 3); ++i)
    for (int j = 0; j < std::min(ps.size(), 3); ++j)
      EXPECT_NEAR(tau_direct(th, ps.basis[i].rep, ps.basis[j].rep).real(), ps.gram(i, j), 1e-8 * ps.gram.cwiseAbs().maxCoeff());
}

// Without local degrees of freedom and without a zero mode nothing survives the gauge quotient.
TEST(PhaseSpace, RaritaSchwingerInThreeDimensionsHasOnlyZeroModeContent) {
  const ModeLattice none = mode_lattice(make_flat_torus(3, {}, 1), SpinStructure{{false, false}});
  ASSERT_EQ(none.zero, -1);
  EXPECT_EQ(build_phase_space(rarita_schwinger(make_flat_torus(3, {}, 1), SpinStructure{{false, false}})).size(), 0);
  EXPECT_GT(build_phase_space(rarita_schwinger(make_flat_torus(3, {}, 1), SpinStructure::trivial_for(3))).size(), 0);
}

TEST(PhaseSpace, TauIndependentOfT) {
  const GaugeTheory ym = yang_mills_linear(make_flat_torus(3, {}, 1));
  const PhaseSpace yps = build_phase_space(ym);
  expect_report_passes(tau_T_independence(ym, 2.0, yps));
  const GaugeTheory toy = toy_fermionic(make_flat_torus(3, {}, 1), 1);
  expect_report_passes(tau_T_independence(toy, 3.0, build_phase_space(toy)));
  const GaugeTheory rs = rarita_schwinger(make_flat_torus(3, {}, 1), SpinStructure::trivial_for(3));
  const PhaseSpace rps = build_phase_space(rs);
  ASSERT_GT(rps.size(), 0);
  expect_report_passes(tau_T_independence(rs, 2.0, rps));
  EXPECT_THROW(with_scaled_T(ym, 0.0), CatalogueRejection);
  EXPECT_THROW(with_scaled_T(klein_gordon(make_flat_torus(2, {}, 1), 1.0), 2.0), NotAGaugeTheory);
}

TEST(PhaseSpace, SolutionPairingRoutesAgree) {
  std::mt19937_64 rng(5);
  for (const GaugeTheory& th : {yang_mills_linear(make_flat_torus(3, {}, 1)),
                                rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{true, false, false}})}) {
    RandomSectionOptions opt;
    opt.modes = th.mode_count();
    const Section f = random_kernel_section(th, rng, opt);
    const Section h = random_kernel_section(th, rng, opt);
    const double t = tau(th, make_class(th, f), make_class(th, h));
    ASSERT_GT(std::abs(t), 1e-6);
    const Section psi1 = solution(th, f), psi2 = solution(th, h);
    EXPECT_LE(rel(sol_pairing_split(th, psi1, psi2), t), 1e-8) << th.name;
    EXPECT_LE(rel(sol_pairing_split(th, psi1, psi2, 3.0, 1.0), t), 1e-8) << th.name;
    EXPECT_LE(rel(sol_pairing_split(th, psi1, psi2, -4.0, 0.25), t), 1e-8) << th.name;
    if (th.statistics == Statistics::fermionic) {
      EXPECT_LE(rel(sol_pairing_surface(th, psi1, psi2, -5.0), t), 1e-8);
      EXPECT_LE(rel(sol_pairing_surface(th, psi1, psi2, 2.0), t), 1e-8);
      EXPECT_LE(rel(sol_pairing_split(th, psi2, psi1), t), 1e-8);
    } else {
      EXPECT_LE(rel(sol_pairing_split(th, psi2, psi1), -t), 1e-8);
    }
  }
}

TEST(PhaseSpace, MajoranaSurfacePairingIsPositiveAndConserved) {
  const GaugeTheory th = majorana_matter(make_flat_torus(3, {}, 1), SpinStructure::trivial_for(3), 0.4);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 3; ++i) {
    const Section psi = solution(th, random_section(th, th.V, rng));
    const double a = sol_pairing_surface(th, psi, psi, -3.0), b = sol_pairing_surface(th, psi, psi, 5.0);
    EXPECT_GT(a, 0.0);
    EXPECT_LE(rel(b, a), 1e-8);
    double l2 = 0.0;
    for (const auto& [m, fn] : psi.modes) l2 += fn->value(-3.0).squaredNorm();
    EXPECT_LE(rel(a, th.volume() * l2), 1e-10);
    EXPECT_LE(rel(sol_pairing_split(th, psi, psi, 1.0), a), 1e-8);
  }
}

TEST(PhaseSpace, PairingRejectsInvalidInputs) {
  const GaugeTheory kg = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  std::mt19937_64 rng(7);
  const Section psi = solution(kg, random_section(kg, kg.V, rng));
  EXPECT_THROW(sol_pairing_surface(kg, psi, psi, 0.0), OperatorNotFirstOrder);
  const Section f = random_section(kg, kg.V, rng);
  EXPECT_THROW(sol_pairing_split(kg, f, psi), NotASolution);
}

TEST(PhaseSpace, GaugeModesPairToZero) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(3, {}, 1));
  std::mt19937_64 rng(8);
  RandomSectionOptions opt;
  opt.modes = th.mode_count();
  const Section psi = solution(th, random_kernel_section(th, rng, opt));
  const Section other = solution(th, random_kernel_section(th, rng, opt));
  const Section eps = GreenOperator(th, Op::R).apply(random_section(th, th.W, rng, opt), GreenKind::causal);
  const Section gauge = apply(th, Op::K, eps);
  const double scale = std::abs(sol_pairing_split(th, psi, other));
  ASSERT_GT(scale, 0.0);
  EXPECT_LE(std::abs(sol_pairing_split(th, psi, gauge)), 1e-8 * scale);
  EXPECT_LE(std::abs(sol_pairing_split(th, gauge, psi)), 1e-8 * scale);
}

TEST(PhaseSpace, LorenzGaugeFixing) {
  const GaugeTheory th = yang_mills_linear(make_flat_torus(3, {}, 1));
  std::mt19937_64 rng(9);
  const auto grid = interior_grid(th.spacetime, 4);
  const Section lorenz = solution(th, random_kernel_section(th, rng));
  const Section same = gauge_fix_lorenz(th, lorenz);
  EXPECT_LE(sup_difference(same, lorenz, grid), 1e-8 * sup_norm(lorenz, grid));

  RandomSectionOptions wide;
  wide.degree = 4;
  const Section eps = random_section(th, th.W, rng, wide);
  const Section psi = combine(1.0, lorenz, 1.0, apply(th, Op::K, eps));
  const double before = sup_norm(apply(th, Op::Kdag, psi), grid);
  ASSERT_GT(before, 1e-3);
  const Section fixed = gauge_fix_lorenz(th, psi);
  EXPECT_LE(sup_norm(apply(th, Op::Kdag, fixed), grid), 1e-8 * std::max(before, sup_norm(psi, grid)));
  double worst = 0.0;
  for (const auto& [m, fn] : fixed.modes)
    for (double t : grid) worst = std::max(worst, max_abs(th.op(Op::Ptilde, m).apply(fn->jet(t, 2))));
  EXPECT_LE(worst, 1e-8 * sup_norm(psi, grid));

  // A compactly supported pure gauge mode is removed entirely.
  const Section pure = apply(th, Op::K, eps);
  EXPECT_LE(sup_norm(gauge_fix_lorenz(th, pure), grid), 1e-8 * sup_norm(pure, grid));
}

TEST(PhaseSpace, TimeSliceRepresentativeIsClassEqual) {
  const GaugeTheory kg = klein_gordon(make_flat_torus(2, {}, 2), 1.0);
  const PhaseSpace ps = build_phase_space(kg);
  Section far;
  far.dim = 1;
  const int z = kg.lattice.zero;
  far.modes[z] = make_fn<BumpProfile>(BumpProfile::scalar(-5.5, 1.0, 1.0));
  const Section slice = time_slice_representative(kg, make_class(kg, far), 3.0, 4.5);
  const Interval s = slice.support();
  EXPECT_GE(s.lo, 3.0);
  EXPECT_LE(s.hi, 4.5);
  EXPECT_LE(class_distance(kg, ps, slice, far), 1e-8);

  Section inside;
  inside.dim = 1;
  inside.modes[z] = make_fn<BumpProfile>(BumpProfile::scalar(0.0, 0.5, 1.0));
  EXPECT_LE(class_distance(kg, ps, time_slice_representative(kg, make_class(kg, inside), -1.0, 1.0), inside), 1e-8);
  EXPECT_THROW(time_slice_representative(kg, make_class(kg, far), 2.0, 2.1), InvalidArgument);
  EXPECT_THROW(time_slice_representative(kg, make_class(kg, far), 2.0, 9.0), InvalidArgument);

  const GaugeTheory rs = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{false, true, true}});
  const PhaseSpace rps = build_phase_space(rs);
  std::mt19937_64 rng(10);
  const Section f = random_kernel_section(rs, rng);
  const Section rslice = time_slice_representative(rs, make_class(rs, f), -4.0, -2.5);
  EXPECT_GE(rslice.support().lo, -4.0);
  EXPECT_LE(rslice.support().hi, -2.5);
  EXPECT_LE(class_distance(rs, rps, rslice, f), 1e-8);
}

TEST(PhaseSpace, ToyFlipNegatesNorms) {
  const GaugeTheory th = toy_fermionic(make_flat_torus(3, {}, 1), 2);
  const Mat b = toy_flip_matrix(th);
  EXPECT_LE(max_abs(b * b - Mat::Identity(b.rows(), b.cols())), 0.0);
  EXPECT_LE(max_abs(b.transpose() * th.V.form * b + th.V.form), 1e-12);
  const PhaseSpace ps = build_phase_space(th);
  EXPECT_EQ(ps.signature.positive, ps.signature.negative);
  EXPECT_EQ(ps.signature.null, 0);
  const TauEvaluator ev(th);
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (ps.gram + ps.gram.transpose()));
  int positive = 0;
  for (int i = 0; i < ps.size(); ++i) {
    if (es.eigenvalues()(i) <= 1e-8 * ps.gram.cwiseAbs().maxCoeff()) continue;
    ++positive;
    const Section f = combine_basis(ps, es.eigenvectors().col(i));
    const double c = ev.value(f, f).real();
    const Section bf = toy_flip(th, f);
    EXPECT_LE(kernel_residual(th, bf), 1e-10);
    EXPECT_LE(rel(ev.value(bf, bf).real(), -c), 1e-8);
  }
  EXPECT_GT(positive, 0);
  EXPECT_THROW(toy_flip_matrix(yang_mills_linear(make_flat_torus(3, {}, 1))), WrongModel);
}

TEST(PhaseSpace, RaritaSchwingerConstantModes) {
  const GaugeTheory th = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4));
  const auto basis = majorana_basis(*th.gamma);
  const Vec u = 0.6 * basis[0] - 1.3 * basis[2];
  const double vol = std::pow(2.0 * pi, 3);
  EXPECT_LE(rel(rs_constant_mode_pairing(th, u, RsComponent::timelike), -vol * 1.5 * u.squaredNorm()), 1e-6);
  const Section spatial = rs_constant_solution(th, u, RsComponent::spatial_transverse);
  const Vec s = spatial.modes.at(th.lattice.zero)->value(0.0);
  const int n = th.gamma->spinor_dim();
  Vec trace = Vec::Zero(n);
  double sq = 0.0;
  for (int i = 1; i < 4; ++i) {
    trace += (*th.gamma)[i] * s.segment(i * n, n);
    sq += s.segment(i * n, n).squaredNorm();
  }
  EXPECT_LE(trace.norm(), 1e-12);
  EXPECT_LE(rel(rs_constant_mode_pairing(th, u, RsComponent::spatial_transverse), vol * sq), 1e-6);
  EXPECT_LE(rel(sol_pairing_split(th, spatial, spatial), vol * sq), 1e-8);
  EXPECT_EQ(rs_constant_mode_pairing(th, Vec::Zero(n), RsComponent::timelike), 0.0);
  const GaugeTheory ap = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{false, true, true}});
  EXPECT_THROW(rs_constant_solution(ap, u, RsComponent::timelike), InvalidArgument);
}

TEST(PhaseSpace, DiracKernelDimension) {
  EXPECT_EQ(dirac_kernel_dim(make_flat_torus(4, {}, 2), SpinStructure::trivial_for(4)), 4);
  EXPECT_EQ(dirac_kernel_dim(make_flat_torus(2, {}, 2), SpinStructure::trivial_for(2)), 2);
  for (const auto& ss : all_spin_structures(4)) {
    if (ss.trivial()) continue;
    EXPECT_EQ(dirac_kernel_dim(make_flat_torus(4, {}, 1), ss), 0) << ss.label();
  }
}

TEST(PhaseSpace, GammaTraceAndZeroComponentFixes) {
  const GaugeTheory th = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{false, true, true}});
  std::mt19937_64 rng(11);
  const auto grid = interior_grid(th.spacetime, 8);
  const Section psi = solution(th, random_kernel_section(th, rng));
  const double before = sup_norm(gamma_trace(th, psi), grid);
  ASSERT_GT(before, 1e-3);
  const Section fixed = rs_gamma_trace_fix(th, psi);
  EXPECT_LE(sup_norm(gamma_trace(th, fixed), grid), 1e-8 * sup_norm(psi, grid));
  const double norm = sol_pairing_split(th, psi, psi);
  EXPECT_LE(rel(sol_pairing_split(th, fixed, fixed), norm), 1e-8);
  const Section none = rs_gamma_trace_fix(th, fixed);
  EXPECT_LE(sup_difference(none, fixed, grid), 1e-8 * sup_norm(fixed, grid));

  const auto result = rs_zero_component_fix(th, fixed, 0.0);
  ASSERT_TRUE(std::holds_alternative<Section>(result));
  const Section& radiation = std::get<Section>(result);
  const int n = th.gamma->spinor_dim();
  double time_part = 0.0;
  for (const auto& [m, fn] : radiation.modes)
    for (double t : probe_times) time_part = std::max(time_part, fn->value(t).head(n).norm());
  EXPECT_LE(time_part, 1e-8 * sup_norm(fixed, grid));
  EXPECT_LE(sup_norm(gamma_trace(th, radiation), grid), 1e-8 * sup_norm(fixed, grid));
  EXPECT_GT(sol_pairing_split(th, radiation, radiation), 0.0);
  EXPECT_LE(rel(sol_pairing_split(th, radiation, radiation), norm), 1e-8);

  double sq = 0.0;
  for (const auto& [m, fn] : radiation.modes) sq += fn->value(0.0).squaredNorm();
  EXPECT_LE(rel(sol_pairing_surface(th, radiation, radiation, 0.0), th.volume() * sq), 1e-8);
}

TEST(PhaseSpace, ZeroComponentFixOnTrivialStructure) {
  const GaugeTheory th = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4));
  const GammaSet& g = *th.gamma;
  const int n = g.spinor_dim();
  const Vec u = majorana_basis(g)[1];
  Vec state = Vec::Zero(4 * n);
  state.head(n) = u;
  state.segment(n, n) = -(g[1] * g[0] * u);
  ASSERT_LE((detail::gamma_trace_map(g) * state).norm(), 1e-12);
  const GreenOperator gp(th, Op::Ptilde);
  const Section constant = gp.free_solution({{th.lattice.zero, state}}, 0.0);
  const auto result = rs_zero_component_fix(th, constant, 0.0);
  ASSERT_TRUE(std::holds_alternative<NoSolutionWitness>(result));
  const auto& w = std::get<NoSolutionWitness>(result);
  EXPECT_EQ(w.mode, th.lattice.zero);
  for (double l : w.labels) EXPECT_EQ(l, 0.0);
  EXPECT_NEAR(w.obstruction, (g[0] * u).norm(), 1e-12);

  std::mt19937_64 rng(12);
  RandomSectionOptions opt;
  opt.modes = 2;
  Section f = random_kernel_section(th, rng, opt);
  f.modes.erase(th.lattice.zero);
  ASSERT_FALSE(f.modes.empty());
  const Section fixed = rs_gamma_trace_fix(th, solution(th, f));
  EXPECT_TRUE(std::holds_alternative<Section>(rs_zero_component_fix(th, fixed, 0.0)));
}

TEST(PhaseSpace, ProjectedRaritaSchwingerIsIndefinite) {
  const Report rep = projected_rs_indefiniteness(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4));
  expect_report_passes(rep);
  double pos = 0.0, neg = 0.0, oracle = 0.0;
  for (const auto& [k, v] : rep.values) {
    if (k == "positive_value") pos = v;
    if (k == "negative_value") neg = v;
    if (k == "negative_oracle") oracle = v;
  }
  EXPECT_GT(pos, 0.0);
  EXPECT_LT(neg, 0.0);
  EXPECT_LE(rel(neg, oracle), 1e-12);
}

TEST(PhaseSpace, RaritaSchwingerSignatureDependsOnSpinStructure) {
  const auto st = make_flat_torus(4, {}, 1);
  const GaugeTheory trivial = rarita_schwinger(st, SpinStructure::trivial_for(4));
  const PhaseSpace tps = build_phase_space(trivial);
  EXPECT_GE(tps.signature.negative, 1);
  const auto witness = negative_norm_witness(trivial, tps);
  ASSERT_TRUE(witness.has_value());
  EXPECT_FALSE(witness->null);
  EXPECT_LE(witness->value, -std::pow(2.0 * pi, 3) * 1.5 * (1.0 - 1e-6));
  EXPECT_LE(kernel_residual(trivial, witness->direction.rep), 1e-10);
  const TauEvaluator ev(trivial);
  EXPECT_LE(rel(ev.value(witness->direction.rep, witness->direction.rep).real(), witness->value), 1e-8);

  const GaugeTheory ap = rarita_schwinger(st, SpinStructure{{true, false, true}});
  const PhaseSpace aps = build_phase_space(ap);
  EXPECT_GE(aps.size(), 40);
  EXPECT_TRUE(aps.positive_definite());
  EXPECT_FALSE(negative_norm_witness(ap, aps).has_value());
}
