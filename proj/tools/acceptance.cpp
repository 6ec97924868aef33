#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaugelab/phase_space.hpp"
#include "gaugelab/quantum_algebra.hpp"
#include "gaugelab/solutions.hpp"
#include "gaugelab/suites.hpp"

using namespace gaugelab;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void print_failed_checks(const Report& rep) {
  for (const auto& c : rep.checks)
    if (!c.passed()) std::cout << "    " << rep.title << ": " << c.name << " = " << c.residual << " > " << c.tolerance << "\n";
}

// Phase spaces of the vector-spinor field on every spin structure of T^3 at cutoff 2.
const std::vector<std::pair<GaugeTheory, PhaseSpace>>& rs_scan() {
  static const auto scan = [] {
    std::vector<std::pair<GaugeTheory, PhaseSpace>> out;
    const Spacetime st = make_flat_torus(4, {}, 2);
    for (const SpinStructure& ss : all_spin_structures(4)) {
      GaugeTheory th = rarita_schwinger(st, ss);
      PhaseSpace ps = build_phase_space(th);
      out.emplace_back(std::move(th), std::move(ps));
    }
    return out;
  }();
  return scan;
}

Outcome rs_constant_modes() {
  Outcome o;
  const GaugeTheory th = rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4));
  const double vol = std::pow(2.0 * pi, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  double worst_t = 0.0, worst_s = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Vec u = Vec::Zero(th.gamma->spinor_dim());
    for (const auto& b : majorana_basis(*th.gamma)) u += gauss(rng) * b;
    worst_t = std::max(worst_t, rel(rs_constant_mode_pairing(th, u, RsComponent::timelike), -vol * 1.5 * u.squaredNorm()));
    const Section spatial = rs_constant_solution(th, u, RsComponent::spatial_transverse);
    const Vec s = spatial.modes.at(th.lattice.zero)->value(0.0);
    const double sq = s.tail(s.size() - u.size()).squaredNorm();
    worst_s = std::max(worst_s, rel(sol_pairing_surface(th, spatial, spatial, 0.0), vol * sq));
  }
  o.detail << "timelike rel err " << worst_t << ", spatial rel err " << worst_s;
  o.require(worst_t <= 1e-6, "timelike constant mode");
  o.require(worst_s <= 1e-6, "spatial constant mode");
  return o;
}

Outcome spin_dichotomy() {
  Outcome o;
  int positive = 0;
  for (const auto& [th, ps] : rs_scan()) {
    std::cout << "    " << th.spin.label() << " size=" << ps.size() << " n+=" << ps.signature.positive
              << " n-=" << ps.signature.negative << " n0=" << ps.signature.null << "\n";
    if (th.spin.trivial()) {
      o.require(ps.signature.negative >= 1, "trivial structure has a negative direction");
    } else {
      const bool ok = ps.positive_definite() && ps.size() >= 40;
      positive += ok;
      o.require(ok, th.spin.label() + " positive definite with at least 40 classes");
    }
    o.require(ps.statistics_residual <= 1e-8, th.spin.label() + " Gram symmetric");
  }
  o.detail << positive << "/7 nontrivial structures positive definite, cutoff 2";
  return o;
}

Outcome toy_balance() {
  Outcome o;
  double worst = 0.0;
  int tested = 0;
  for (int pairs : {1, 2}) {
    const GaugeTheory th = toy_fermionic(make_flat_torus(3, {}, 1), pairs);
    const PhaseSpace ps = build_phase_space(th);
    const TauEvaluator ev(th);
    std::vector<Section> classes;
    for (const auto& b : ps.basis) classes.push_back(b.rep);
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (ps.gram + ps.gram.transpose()));
    for (int i = 0; i < ps.size(); ++i)
      if (es.eigenvalues()(i) > 0.0) classes.push_back(combine_basis(ps, es.eigenvectors().col(i)));
    for (const Section& f : classes) {
      const double norm = ev.value(f, f).real();
      if (norm <= 1e-8) continue;
      const ObservableClass flipped = make_class(th, toy_flip(th, f));
      worst = std::max(worst, rel(ev.value(flipped.rep, flipped.rep).real(), -norm));
      ++tested;
    }
    o.require(ps.signature.positive == ps.signature.negative && ps.size() > 0, "n+ = n- for m = " + std::to_string(pairs));
    o.detail << "m=" << pairs << " n+=" << ps.signature.positive << " n-=" << ps.signature.negative << "; ";
  }
  o.detail << tested << " positive classes, worst flip rel err " << worst;
  o.require(tested > 0 && worst <= 1e-8, "flip negates norms");
  return o;
}

Outcome majorana_positivity() {
  Outcome o;
  for (int D : {3, 4})
    for (const SpinStructure& ss : all_spin_structures(D)) {
      const GaugeTheory th = majorana_matter(make_flat_torus(D, {}, 1), ss, 0.3);
      const PhaseSpace ps = build_phase_space(th);
      o.require(ps.positive_definite(), "Majorana D=" + std::to_string(D) + " " + ss.label());
    }
  const Report rs = projected_rs_indefiniteness(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4));
  print_failed_checks(rs);
  o.require(rs.passed(), "projected vector-spinor has both signs");
  o.detail << "Majorana positive on all structures D=3,4; projected vector-spinor values " << rs.values[0].second << ", "
           << rs.values[1].second;
  return o;
}

Outcome identity_suites() {
  Outcome o;
  const std::vector<std::pair<GaugeTheory, double>> models{
      {klein_gordon(make_flat_torus(2, {}, 2), 1.0), 2.0},
      {majorana_matter(make_flat_torus(3, {}, 1), SpinStructure{{false, true}}, 0.3), 2.0},
      {yang_mills_linear(make_flat_torus(3, {}, 1)), 2.0},
      {linearised_gr(make_flat_torus(4, {}, 1)), 2.0},
      {toy_fermionic(make_flat_torus(3, {}, 1), 1), 3.0},
      {rarita_schwinger(make_flat_torus(4, {}, 1), SpinStructure{{false, true, true}}), 2.0}};
  int checks = 0;
  for (const auto& [th, scale] : models) {
    const auto t0 = std::chrono::steady_clock::now();
    const PhaseSpace ps = build_phase_space(th);
    const Report rep = identity_suite(th, ps, {50, scale, 1});
    print_failed_checks(rep);
    checks += static_cast<int>(rep.checks.size());
    o.require(rep.passed(), th.name);
    std::cout << "    " << th.name << ": " << rep.checks.size() << " checks, "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  }
  o.detail << checks << " checks over 6 models, 50 random sections per property";
  return o;
}

Outcome quantization() {
  Outcome o;
  const Report kg = weyl_relation_report(build_phase_space(klein_gordon(make_flat_torus(2, {}, 2), 1.0)).gram, 50, 1);
  const Report ym = weyl_relation_report(build_phase_space(yang_mills_linear(make_flat_torus(3, {}, 1))).gram, 50, 2);
  print_failed_checks(kg);
  print_failed_checks(ym);
  o.require(kg.passed() && ym.passed(), "Weyl relations");

  double car = 0.0;
  auto represent = [&](const GaugeTheory& th, const PhaseSpace& ps, const std::string& label) {
    try {
      const CarRep rep = car_representation(th, ps);
      car = std::max(car, rep.anticommutator_residual);
      o.require(rep.anticommutator_residual <= 1e-10 && rep.string_algebra_residual == 0.0, label);
    } catch (const NotPositiveDefinite&) {
      o.require(false, label + " unexpectedly obstructed");
    }
  };
  auto obstructed = [&](const GaugeTheory& th, const PhaseSpace& ps, const std::string& label) {
    try {
      car_representation(th, ps);
      o.require(false, label + " accepted");
    } catch (const NotPositiveDefinite& e) {
      const RVec w = e.witness;
      o.require(e.value < 0.0 && std::abs(w.dot(ps.gram * w) - e.value) <= 1e-8 * std::abs(e.value), label + " witness");
    }
  };
  const GaugeTheory maj = majorana_matter(make_flat_torus(4, {}, 1), SpinStructure::trivial_for(4), 0.3);
  represent(maj, build_phase_space(maj), "Majorana CAR");
  int built = 0;
  for (const auto& [th, ps] : rs_scan()) {
    if (th.spin.trivial()) {
      obstructed(th, ps, "trivial-structure witness");
    } else {
      represent(th, ps, "vector-spinor " + th.spin.label());
      ++built;
    }
  }
  const GaugeTheory toy = toy_fermionic(make_flat_torus(3, {}, 1), 1);
  obstructed(toy, build_phase_space(toy), "toy witness");
  o.detail << "Weyl KG/YM pass, CAR on Majorana + " << built << " structures, worst anticommutator " << car
           << ", witnesses on trivial structure and toy";
  return o;
}

Outcome yang_mills_nondegeneracy() {
  Outcome o;
  for (auto [D, N] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {4, 1}}) {
    const PhaseSpace ps = build_phase_space(yang_mills_linear(make_flat_torus(D, {}, N)));
    o.detail << "D=" << D << " N=" << N << " size=" << ps.size() << " null=" << ps.signature.null << "; ";
    o.require(ps.size() > 0 && ps.signature.null == 0, "D=" + std::to_string(D));
  }
  o.detail << "threshold 1e-8, evidence within the cutoff";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"vector-spinor constant modes on the trivial torus", rs_constant_modes},
      {"spin-structure dichotomy", spin_dichotomy},
      {"toy model flip and balanced signature", toy_balance},
      {"Majorana positivity and projected vector-spinor indefiniteness", majorana_positivity},
      {"operator identity suite", identity_suites},
      {"quantization layer", quantization},
      {"Yang-Mills nondegeneracy", yang_mills_nondegeneracy}};
  bool all = true;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << index << " (" << name << "): " << o.detail.str()
              << " [" << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::setprecision(6)
              << std::endl;
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
