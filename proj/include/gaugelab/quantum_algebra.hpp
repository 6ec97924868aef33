#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "phase_space.hpp"

namespace gaugelab {

// ------------------------------------------------------------------------------------------------
// Weyl (CCR) symbols: finite combinations of w(f), f an integer coordinate vector over a basis.

using WeylKey = std::vector<long>;

struct WeylElement {
  int rank = 0;
  std::map<WeylKey, cd> terms;

  static WeylElement unit(int rank) { return generator(WeylKey(rank, 0)); }
  static WeylElement generator(WeylKey f, cd coeff = 1.0) {
    WeylElement w;
    w.rank = static_cast<int>(f.size());
    w.terms.emplace(std::move(f), coeff);
    return w;
  }
};

inline double symplectic_value(const RMat& gram, const WeylKey& f, const WeylKey& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0)
      for (std::size_t j = 0; j < h.size(); ++j)
        if (h[j] != 0) s += static_cast<double>(f[i]) * gram(i, j) * static_cast<double>(h[j]);
  return s;
}

inline WeylElement operator+(const WeylElement& a, const WeylElement& b) {
  if (a.rank != b.rank) throw BasisMismatch("Weyl elements over different bases");
  WeylElement out = a;
  for (const auto& [k, c] : b.terms) out.terms[k] += c;
  return out;
}

inline WeylElement scaled(const WeylElement& a, cd s) {
  WeylElement out = a;
  for (auto& [k, c] : out.terms) c *= s;
  return out;
}

// w(f) w(h) = exp(-i tau(f, h) / 2) w(f + h), extended bilinearly.
inline WeylElement weyl_product(const WeylElement& x, const WeylElement& y, const RMat& gram) {
  if (x.rank != y.rank || gram.rows() != x.rank || gram.cols() != x.rank)
    throw BasisMismatch("Weyl elements and Gram matrix over different bases");
  WeylElement out;
  out.rank = x.rank;
  for (const auto& [f, a] : x.terms)
    for (const auto& [h, b] : y.terms) {
      WeylKey s(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) s[i] = f[i] + h[i];
      out.terms[s] += a * b * std::exp(-0.5 * I_unit * symplectic_value(gram, f, h));
    }
  return out;
}

// w(f)* = w(-f), antilinear.
inline WeylElement star(const WeylElement& x) {
  WeylElement out;
  out.rank = x.rank;
  for (const auto& [f, a] : x.terms) {
    WeylKey m(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) m[i] = -f[i];
    out.terms[m] += std::conj(a);
  }
  return out;
}

inline double weyl_distance(const WeylElement& a, const WeylElement& b) {
  if (a.rank != b.rank) throw BasisMismatch("Weyl elements over different bases");
  double d = 0.0;
  std::map<WeylKey, cd> diff = a.terms;
  for (const auto& [k, c] : b.terms) diff[k] -= c;
  for (const auto& [k, c] : diff) d = std::max(d, std::abs(c));
  return d;
}

namespace detail {

inline WeylKey sparse_weyl_key(int rank, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> slot(0, rank - 1), value(-2, 2);
  WeylKey k(rank, 0);
  for (int i = 0; i < std::min(rank, 3); ++i) k[slot(rng)] = value(rng);
  return k;
}

inline WeylElement random_weyl_element(int rank, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  WeylElement w = WeylElement::generator(sparse_weyl_key(rank, rng), cd(g(rng), g(rng)));
  for (int i = 0; i < 2; ++i) w = w + WeylElement::generator(sparse_weyl_key(rank, rng), cd(g(rng), g(rng)));
  return w;
}

inline double coefficient_size(const WeylElement& w) {
  double s = 0.0;
  for (const auto& [k, c] : w.terms) s += std::abs(c);
  return s;
}

}  // namespace detail

// Weyl relations over random keys: unit and inverse, star, the commutation phase
// w(f) w(h) w(-f) w(-h) = exp(-i tau(f, h)), associativity and (x y)* = y* x*.
inline Report weyl_relation_report(const RMat& gram, int samples, std::uint64_t seed = 3) {
  const int n = static_cast<int>(gram.rows());
  if (n == 0 || gram.cols() != n) throw ShapeMismatch("Gram matrix must be square and nonempty");
  std::mt19937_64 rng(seed);
  const WeylElement one = WeylElement::unit(n);
  double inverse = 0.0, unit = 0.0, adjoint = 0.0, phase = 0.0, assoc = 0.0, anti = 0.0;
  for (int t = 0; t < samples; ++t) {
    const WeylKey f = detail::sparse_weyl_key(n, rng), h = detail::sparse_weyl_key(n, rng);
    WeylKey mf = f, mh = h;
    for (auto& x : mf) x = -x;
    for (auto& x : mh) x = -x;
    const WeylElement wf = WeylElement::generator(f), wh = WeylElement::generator(h);
    const WeylElement wmf = WeylElement::generator(mf), wmh = WeylElement::generator(mh);
    inverse = std::max(inverse, weyl_distance(weyl_product(wf, wmf, gram), one));
    unit = std::max({unit, weyl_distance(weyl_product(one, wf, gram), wf), weyl_distance(weyl_product(wf, one, gram), wf)});
    adjoint = std::max(adjoint, weyl_distance(star(wf), wmf));
    const WeylElement comm = weyl_product(weyl_product(weyl_product(wf, wh, gram), wmf, gram), wmh, gram);
    phase = std::max(phase, weyl_distance(comm, scaled(one, std::exp(-I_unit * symplectic_value(gram, f, h)))));

    const WeylElement x = detail::random_weyl_element(n, rng), y = detail::random_weyl_element(n, rng),
                      z = detail::random_weyl_element(n, rng);
    const double size = detail::coefficient_size(x) * detail::coefficient_size(y);
    const WeylElement left = weyl_product(weyl_product(x, y, gram), z, gram);
    const WeylElement right = weyl_product(x, weyl_product(y, z, gram), gram);
    assoc = std::max(assoc, weyl_distance(left, right) / (size * detail::coefficient_size(z)));
    anti = std::max(anti, weyl_distance(star(weyl_product(x, y, gram)), weyl_product(star(y), star(x), gram)) / size);
  }
  Report rep;
  rep.title = "weyl relations";
  rep.add("w_f_times_w_minus_f_is_unit", inverse, 1e-12);
  rep.add("unit_is_neutral", unit, 1e-12);
  rep.add("star_is_negation", adjoint, 1e-12);
  rep.add("commutation_phase", phase, 1e-12);
  rep.add("associativity", assoc, 1e-12);
  rep.add("star_reverses_products", anti, 1e-12);
  rep.note("rank", n);
  rep.note("samples", samples);
  return rep;
}

// ------------------------------------------------------------------------------------------------
// Self-dual CAR representations.

// Tensor product of single-qubit Paulis (0 = I, 1 = X, 2 = Y, 3 = Z) with a phase.
struct PauliString {
  std::vector<std::uint8_t> ops;
  cd phase = 1.0;

  PauliString operator*(const PauliString& o) const {
    PauliString out{std::vector<std::uint8_t>(ops.size()), phase * o.phase};
    for (std::size_t q = 0; q < ops.size(); ++q) {
      const int a = ops[q], b = o.ops[q];
      if (a == 0 || b == 0 || a == b) {
        out.ops[q] = static_cast<std::uint8_t>(a == b ? 0 : a + b);
        continue;
      }
      // sigma_a sigma_b = i eps_abc sigma_c for a != b.
      const int c = 6 - a - b;
      out.phase *= ((b - a + 3) % 3 == 1) ? I_unit : -I_unit;
      out.ops[q] = static_cast<std::uint8_t>(c);
    }
    return out;
  }
  bool same_ops(const PauliString& o) const { return ops == o.ops; }

  Mat dense() const {
    Mat m = Mat::Identity(1, 1);
    for (auto p : ops) m = kron(m, p == 0 ? Mat::Identity(2, 2) : pauli(p));
    return phase * m;
  }
};

// Jordan-Wigner Majorana generators c_j (unnormalized, c_j^2 = 1) on ceil(n/2) qubits.
inline std::vector<PauliString> majorana_strings(int n) {
  const int q = (n + 1) / 2;
  std::vector<PauliString> out;
  for (int j = 0; j < n; ++j) {
    PauliString s{std::vector<std::uint8_t>(q, 0), 1.0};
    const int site = j / 2;
    for (int k = 0; k < site; ++k) s.ops[k] = 3;
    s.ops[site] = (j % 2 == 0) ? 1 : 2;
    out.push_back(std::move(s));
  }
  return out;
}

struct CarRep {
  RMat gram;
  RMat change;  // change * change^T = gram
  int qubits = 0;
  std::vector<Mat> generators;  // dense b_i for small n
  double anticommutator_residual = 0.0;
  double hermiticity_residual = 0.0;
  double string_algebra_residual = 0.0;

  int size() const { return static_cast<int>(gram.rows()); }
  bool dense() const { return !generators.empty(); }
};

inline constexpr int car_dense_limit = 12;

// b_i = sum_j L_ij c_j / sqrt(2) with L L^T = gram, so {b_i, b_j} = gram_ij. Requires a positive
// definite Gram; otherwise reports the eigenvector of the offending eigenvalue.
inline CarRep car_representation(const RMat& gram, double tol = 1e-8) {
  const int n = static_cast<int>(gram.rows());
  if (gram.cols() != n || n == 0) throw ShapeMismatch("Gram matrix must be square and nonempty");
  const double scale = gram.cwiseAbs().maxCoeff();
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) throw InvalidArgument("Gram matrix is not symmetric");
  const RMat sym = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(sym);
  const RVec& ev = es.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  if (ev(0) <= tol * radius)
    throw NotPositiveDefinite(ev(0) < -tol * radius ? "pairing has a negative-norm direction" : "pairing has a null direction",
                              es.eigenvectors().col(0), ev(0));
  CarRep rep;
  rep.gram = gram;
  rep.change = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  rep.qubits = (n + 1) / 2;

  // Pauli-string relations {c_j, c_l} = 2 delta_jl and hermiticity, exactly in string algebra.
  const auto c = majorana_strings(n);
  double alg = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      const PauliString a = c[j] * c[l], b = c[l] * c[j];
      const bool identity = std::all_of(a.ops.begin(), a.ops.end(), [](auto p) { return p == 0; });
      const cd anti = a.same_ops(b) ? a.phase + b.phase : a.phase;
      const double expect = (j == l) ? 2.0 : 0.0;
      alg = std::max(alg, (j == l && !identity) ? 1.0 : std::abs(anti - expect));
    }
  rep.string_algebra_residual = alg;
  rep.anticommutator_residual = (rep.change * rep.change.transpose() - gram).cwiseAbs().maxCoeff() / scale;

  if (n <= car_dense_limit) {
    std::vector<Mat> cm;
    for (const auto& s : c) cm.push_back(s.dense() / std::sqrt(2.0));
    const int dim = 1 << rep.qubits;
    for (int i = 0; i < n; ++i) {
      Mat b = Mat::Zero(dim, dim);
      for (int j = 0; j < n; ++j) b += rep.change(i, j) * cm[j];
      rep.generators.push_back(std::move(b));
    }
    double anti = 0.0, herm = 0.0;
    const Mat id = Mat::Identity(dim, dim);
    for (int i = 0; i < n; ++i) {
      herm = std::max(herm, max_abs(rep.generators[i] - rep.generators[i].adjoint()));
      for (int j = 0; j < n; ++j) {
        const Mat ac = rep.generators[i] * rep.generators[j] + rep.generators[j] * rep.generators[i];
        anti = std::max(anti, max_abs(ac - gram(i, j) * id));
      }
    }
    rep.anticommutator_residual = std::max(rep.anticommutator_residual, anti / scale);
    rep.hermiticity_residual = herm / scale;
  }
  return rep;
}

inline CarRep car_representation(const GaugeTheory& th, const PhaseSpace& ps) {
  if (th.statistics != Statistics::fermionic) throw InvalidArgument("CAR quantization needs a fermionic theory");
  return car_representation(ps.gram, ps.null_tolerance);
}

}  // namespace gaugelab
