#include <gtest/gtest.h>

#include <random>

#include "gaugelab/quantum_algebra.hpp"

using namespace gaugelab;

namespace {

WeylKey sparse_key(int rank, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> slot(0, rank - 1), value(-2, 2);
  WeylKey k(rank, 0);
  for (int i = 0; i < 3; ++i) k[slot(rng)] = value(rng);
  return k;
}

WeylKey negated(WeylKey k) {
  for (auto& x : k) x = -x;
  return k;
}

WeylElement random_element(int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  WeylElement w = WeylElement::generator(sparse_key(rank, rng), cd(g(rng), g(rng)));
  for (int i = 0; i < 2; ++i) w = w + WeylElement::generator(sparse_key(rank, rng), cd(g(rng), g(rng)));
  return w;
}

void check_weyl_relations(const RMat& gram, std::uint64_t seed) {
  const int n = static_cast<int>(gram.rows());
  std::mt19937_64 rng(seed);
  const WeylElement one = WeylElement::unit(n);
  for (int t = 0; t < 20; ++t) {
    const WeylKey f = sparse_key(n, rng), h = sparse_key(n, rng);
    const WeylElement wf = WeylElement::generator(f), wh = WeylElement::generator(h);
    const WeylElement wmf = WeylElement::generator(negated(f)), wmh = WeylElement::generator(negated(h));
    EXPECT_LE(weyl_distance(weyl_product(wf, wmf, gram), one), 1e-12);
    EXPECT_LE(weyl_distance(weyl_product(one, wf, gram), wf), 1e-12);
    EXPECT_LE(weyl_distance(star(wf), wmf), 0.0);
    const WeylElement comm = weyl_product(weyl_product(weyl_product(wf, wh, gram), wmf, gram), wmh, gram);
    const cd phase = std::exp(-I_unit * symplectic_value(gram, f, h));
    EXPECT_LE(weyl_distance(comm, scaled(one, phase)), 1e-12);

    const WeylElement x = random_element(n, rng), y = random_element(n, rng), z = random_element(n, rng);
    const WeylElement left = weyl_product(weyl_product(x, y, gram), z, gram);
    const WeylElement right = weyl_product(x, weyl_product(y, z, gram), gram);
    EXPECT_LE(weyl_distance(left, right), 1e-12 * 30.0);
    EXPECT_LE(weyl_distance(star(weyl_product(x, y, gram)), weyl_product(star(y), star(x), gram)), 1e-12 * 30.0);
  }
}

}  // namespace

TEST(QuantumAlgebra, WeylRelationsOnKleinGordonPhaseSpace) {
  const PhaseSpace ps = build_phase_space(klein_gordon(make_flat_torus(2, {}, 2), 1.0));
  check_weyl_relations(ps.gram, 1);
}

TEST(QuantumAlgebra, WeylRelationsOnYangMillsPhaseSpace) {
  const PhaseSpace ps = build_phase_space(yang_mills_linear(make_flat_torus(2, {}, 1)));
  check_weyl_relations(ps.gram, 2);
}

TEST(QuantumAlgebra, WeylBasisMismatch) {
  const RMat gram = RMat::Zero(2, 2);
  EXPECT_THROW(weyl_product(WeylElement::unit(2), WeylElement::unit(3), gram), BasisMismatch);
  EXPECT_THROW(weyl_product(WeylElement::unit(3), WeylElement::unit(3), gram), BasisMismatch);
}

TEST(QuantumAlgebra, PauliStringsMultiplyLikeMatrices) {
  const auto c = majorana_strings(5);
  for (const auto& a : c)
    for (const auto& b : c) EXPECT_LE(max_abs((a * b).dense() - a.dense() * b.dense()), 1e-14);
}

TEST(QuantumAlgebra, CarIdentityGramTwoGenerators) {
  const CarRep rep = car_representation(RMat::Identity(2, 2));
  ASSERT_TRUE(rep.dense());
  ASSERT_EQ(rep.generators.size(), 2u);
  EXPECT_EQ(rep.generators[0].rows(), 2);
  const Mat id = Mat::Identity(2, 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE(max_abs(rep.generators[i] - rep.generators[i].adjoint()), 1e-12);
    for (int j = 0; j < 2; ++j) {
      const Mat ac = rep.generators[i] * rep.generators[j] + rep.generators[j] * rep.generators[i];
      EXPECT_LE(max_abs(ac - (i == j ? 1.0 : 0.0) * id), 1e-12);
    }
  }
}

TEST(QuantumAlgebra, CarRandomPositiveGram) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  RMat a(5, 5);
  for (int i = 0; i < 25; ++i) a(i) = g(rng);
  const RMat gram = a * a.transpose() + RMat::Identity(5, 5);
  const CarRep rep = car_representation(gram);
  EXPECT_EQ(rep.generators[0].rows(), 8);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const Mat ac = rep.generators[i] * rep.generators[j] + rep.generators[j] * rep.generators[i];
      EXPECT_LE(max_abs(ac - gram(i, j) * Mat::Identity(8, 8)), 1e-10 * gram.cwiseAbs().maxCoeff());
    }
  EXPECT_LE(rep.anticommutator_residual, 1e-10);
  EXPECT_LE(rep.hermiticity_residual, 1e-10);
}

TEST(QuantumAlgebra, CarLargeGramUsesStringAlgebra) {
  const CarRep rep = car_representation(RMat::Identity(30, 30) * 2.0);
  EXPECT_FALSE(rep.dense());
  EXPECT_EQ(rep.qubits, 15);
  EXPECT_EQ(rep.string_algebra_residual, 0.0);
  EXPECT_LE(rep.anticommutator_residual, 1e-14);
}

TEST(QuantumAlgebra, CarOnMajoranaPhaseSpace) {
  const GaugeTheory th = majorana_matter(make_flat_torus(3, {}, 1), SpinStructure{{false, true}}, 0.3);
  const PhaseSpace ps = build_phase_space(th);
  const CarRep rep = car_representation(th, ps);
  EXPECT_EQ(rep.size(), ps.size());
  EXPECT_LE(rep.anticommutator_residual, 1e-10);
  EXPECT_EQ(rep.string_algebra_residual, 0.0);
}

TEST(QuantumAlgebra, CarRejectsToyModelWithWitness) {
  const GaugeTheory th = toy_fermionic(make_flat_torus(3, {}, 1), 1);
  const PhaseSpace ps = build_phase_space(th);
  try {
    car_representation(th, ps);
    FAIL() << "indefinite Gram accepted";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_LT(e.value, 0.0);
    EXPECT_NEAR(e.witness.norm(), 1.0, 1e-12);
    EXPECT_NEAR(e.witness.dot(ps.gram * e.witness), e.value, 1e-8 * ps.gram.cwiseAbs().maxCoeff());
  }
  const auto w = negative_norm_witness(th, ps);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT(w->value, 0.0);
  EXPECT_FALSE(w->null);
}

TEST(QuantumAlgebra, SemidefiniteGramIsRejected) {
  RMat gram = RMat::Zero(3, 3);
  gram(0, 0) = 1.0;
  gram(1, 1) = 2.0;
  try {
    car_representation(gram);
    FAIL() << "null direction accepted";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.value, 0.0);
    EXPECT_NEAR(std::abs(e.witness(2)), 1.0, 1e-12);
  }

  const GaugeTheory th = majorana_matter(make_flat_torus(2, {}, 1), SpinStructure::trivial_for(2), 0.0);
  PhaseSpace ps = build_phase_space(th);
  ASSERT_GE(ps.size(), 2);
  ps.gram.row(0).setZero();
  ps.gram.col(0).setZero();
  const auto w = negative_norm_witness(th, ps);
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(w->null);
}

TEST(QuantumAlgebra, CarNeedsFermionicTheory) {
  const GaugeTheory th = klein_gordon(make_flat_torus(2, {}, 1), 1.0);
  EXPECT_THROW(car_representation(th, build_phase_space(th)), InvalidArgument);
}
