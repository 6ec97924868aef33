#include <gtest/gtest.h>

#include <random>
#include <set>

#include "gaugelab/spacetime.hpp"

using namespace gaugelab;

TEST(Spacetime, DefaultTorusVolume) {
  const Spacetime st = make_flat_torus(4, {}, 2);
  EXPECT_NEAR(st.volume(), std::pow(2.0 * pi, 3), 1e-9);
  EXPECT_EQ(st.spatial_dim(), 3);
}

TEST(Spacetime, CutoffOneCircleHasThreeModes) {
  const Spacetime st = make_flat_torus(2, {}, 1);
  const ModeLattice lat = mode_lattice(st, SpinStructure::trivial_for(2));
  ASSERT_EQ(lat.size(), 3);
  std::set<double> labels;
  for (const auto& l : lat.labels) labels.insert(l[0]);
  EXPECT_EQ(labels, (std::set<double>{-1.0, 0.0, 1.0}));
  EXPECT_GE(lat.zero, 0);
}

TEST(Spacetime, AntiperiodicDirectionRemovesZeroMomentum) {
  const Spacetime st = make_flat_torus(3, {}, 2);
  SpinStructure ss{{false, true}};
  const ModeLattice lat = mode_lattice(st, ss);
  EXPECT_EQ(lat.zero, -1);
  for (const auto& k : lat.momenta) EXPECT_GT(k.norm(), 0.0);
  bool half = false;
  for (const auto& l : lat.labels) {
    EXPECT_DOUBLE_EQ(std::abs(std::fmod(l[0], 1.0)), 0.5);
    half = half || (l[0] == 0.5);
  }
  EXPECT_TRUE(half);
}

TEST(Spacetime, AntiperiodicCircleIsHalfIntegerGrid) {
  const Spacetime st = make_flat_torus(2, {}, 1);
  const ModeLattice lat = mode_lattice(st, SpinStructure{{false}});
  std::set<double> labels;
  for (const auto& l : lat.labels) labels.insert(l[0]);
  EXPECT_EQ(labels, (std::set<double>{-1.5, -0.5, 0.5, 1.5}));
}

TEST(Spacetime, TrivialStructureContainsZeroMode) {
  for (int D : {2, 3, 4}) {
    const ModeLattice lat = mode_lattice(make_flat_torus(D, {}, 2), SpinStructure::trivial_for(D));
    ASSERT_GE(lat.zero, 0);
    EXPECT_EQ(lat.momenta[lat.zero].norm(), 0.0);
    EXPECT_EQ(lat.size(), static_cast<int>(std::pow(5, D - 1)));
  }
}

TEST(Spacetime, NontrivialStructuresHavePositiveGap) {
  const Spacetime st = make_flat_torus(4, {}, 2);
  const auto all = all_spin_structures(4);
  ASSERT_EQ(all.size(), 8u);
  EXPECT_TRUE(all[0].trivial());
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_FALSE(all[i].trivial());
    EXPECT_GT(mode_lattice(st, all[i]).min_norm(), 0.0);
  }
}

TEST(Spacetime, NegationPairsMomenta) {
  const Spacetime st = make_flat_torus(3, {}, 2);
  for (const auto& ss : all_spin_structures(3)) {
    const ModeLattice lat = mode_lattice(st, ss);
    for (int m = 0; m < lat.size(); ++m) {
      ASSERT_GE(lat.negation[m], 0);
      EXPECT_LE((lat.momenta[m] + lat.momenta[lat.negation[m]]).norm(), 1e-12);
    }
  }
}

TEST(Spacetime, LengthsScaleMomenta) {
  const Spacetime st = make_flat_torus(2, {4.0 * pi}, 1);
  const ModeLattice lat = mode_lattice(st, SpinStructure::trivial_for(2));
  double kmax = 0.0;
  for (const auto& k : lat.momenta) kmax = std::max(kmax, k.norm());
  EXPECT_NEAR(kmax, 0.5, 1e-12);
  EXPECT_NEAR(st.volume(), 4.0 * pi, 1e-12);
}

TEST(Spacetime, InvalidInputsRejected) {
  EXPECT_THROW(make_flat_torus(1, {}, 1), InvalidArgument);
  EXPECT_THROW(make_flat_torus(3, {1.0, -1.0}, 1), InvalidArgument);
  EXPECT_THROW(make_flat_torus(3, {1.0}, 1), ShapeMismatch);
  EXPECT_THROW(make_flat_torus(3, {}, 0), InvalidArgument);
  EXPECT_THROW(mode_lattice(make_flat_torus(3, {}, 1), SpinStructure{{true}}), ShapeMismatch);
}

TEST(Spacetime, CauchySurfaceDensities) {
  const CauchySurfaceData flat = cauchy_surface(make_flat_torus(3, {}, 1), 1.5);
  EXPECT_EQ(flat.volume_density, 1.0);
  EXPECT_EQ(flat.normal(0), 1.0);
  EXPECT_EQ(cauchy_surface(make_frw_circle(frw_constant(1.0), 1), 0.0).volume_density, 1.0);
  EXPECT_DOUBLE_EQ(cauchy_surface(make_frw_circle(frw_constant(2.0), 1), 0.3).volume_density, 2.0);
  EXPECT_THROW(cauchy_surface(make_flat_torus(2, {}, 1), 100.0), OutsideTimeGrid);
}

TEST(Spacetime, TanhRampIsSmoothAndPositive) {
  const FrwCircle a = frw_tanh_ramp(1.5, 0.5, 2.0);
  for (double t = -8.0; t <= 8.0; t += 0.37) {
    EXPECT_GT(a.scale(t), 0.0);
    const double h = 1e-5;
    EXPECT_NEAR(a.scale_rate(t), (a.scale(t + h) - a.scale(t - h)) / (2 * h), 1e-8);
  }
}

TEST(Spacetime, ParsevalOnRandomCoefficients) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (const auto& ss : all_spin_structures(3)) {
    const Spacetime st = make_flat_torus(3, {}, 2);
    const ModeLattice lat = mode_lattice(st, ss);
    std::vector<cd> c(lat.size());
    double coeff_norm = 0.0;
    for (auto& x : c) {
      x = cd(g(rng), g(rng));
      coeff_norm += std::norm(x);
    }
    const int points = 16;
    const auto values = synthesize(st, lat, c, points);
    double grid_norm = 0.0;
    for (const auto& v : values) grid_norm += std::norm(v);
    grid_norm *= st.volume() / values.size();
    EXPECT_NEAR(grid_norm, st.volume() * coeff_norm, 1e-12 * st.volume() * coeff_norm) << ss.label();
  }
}
