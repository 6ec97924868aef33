#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "report.hpp"

namespace gaugelab {

struct GammaSet {
  int D = 0;
  std::vector<Mat> gammas;
  Mat beta;
  Mat conj_C;

  int spinor_dim() const { return static_cast<int>(beta.rows()); }
  const Mat& operator[](int a) const { return gammas.at(a); }

  // Matrix of the antilinear charge conjugation: chi^c = conj_matrix() * conj(chi).
  Mat conj_matrix() const { return -beta * conj_C.conjugate(); }

  // Sum_i gamma^i k_i over spatial directions.
  Mat spatial_slash(const RVec& k) const {
    Mat s = Mat::Zero(spinor_dim(), spinor_dim());
    for (int i = 0; i < k.size(); ++i) s += gammas.at(i + 1) * k(i);
    return s;
  }
};

inline bool clifford_dimension_supported(int D) {
  const int r = D % 8;
  return D >= 2 && (r == 2 || r == 3 || r == 4);
}

namespace detail {

inline std::vector<Mat> raw_gammas(int D) {
  std::vector<Mat> g;
  Mat g0(2, 2);
  g0 << 0, 1, -1, 0;
  if (D % 2 == 0) {
    g = {g0, pauli(1)};
    for (int d = 2; d < D; d += 2) {
      std::vector<Mat> next;
      for (const auto& m : g) next.push_back(kron(m, pauli(1)));
      const Mat id = Mat::Identity(g[0].rows(), g[0].cols());
      next.push_back(kron(id, pauli(2)));
      next.push_back(kron(id, pauli(3)));
      g = std::move(next);
    }
  } else {
    g = {g0, pauli(1), pauli(3)};
    for (int d = 3; d < D; d += 2) {
      std::vector<Mat> next;
      for (const auto& m : g) next.push_back(kron(m, pauli(1)));
      const Mat id = Mat::Identity(g[0].rows(), g[0].cols());
      next.push_back(kron(id, pauli(2)));
      next.push_back(kron(id, pauli(3)));
      g = std::move(next);
    }
  }
  return g;
}

inline Mat normalized_conjugation(Mat c) {
  const int n = static_cast<int>(c.rows());
  c *= std::sqrt(static_cast<double>(n) / (c.adjoint() * c).trace().real());
  Eigen::Index r = 0, col = 0;
  c.cwiseAbs().maxCoeff(&r, &col);
  c *= std::conj(c(r, col)) / std::abs(c(r, col));
  return c;
}

inline bool is_charge_conjugation(const std::vector<Mat>& g, const Mat& c) {
  if (max_abs(c.transpose() + c) > 1e-12) return false;
  const Mat cinv = c.inverse();
  for (const auto& m : g)
    if (max_abs(m.transpose() + c * m * cinv) > 1e-10) return false;
  return true;
}

// Large spinor spaces: every tensor-built gamma is symmetric or antisymmetric, and the product
// of one of the two classes is the charge conjugation matrix.
inline Mat charge_conjugation_from_products(const std::vector<Mat>& g) {
  const int n = static_cast<int>(g[0].rows());
  Mat sym = Mat::Identity(n, n), anti = Mat::Identity(n, n);
  for (const auto& m : g) {
    if (max_abs(m.transpose() - m) < 1e-14) sym = sym * m;
    else if (max_abs(m.transpose() + m) < 1e-14) anti = anti * m;
    else throw DimensionNotSupported("gamma matrix neither symmetric nor antisymmetric");
  }
  for (const Mat& c : {sym, anti})
    if (is_charge_conjugation(g, c)) return c;
  throw DimensionNotSupported("no antisymmetric charge conjugation matrix");
}

// Solves gamma^T C + C gamma = 0 for all gammas together with C^T = -C.
inline Mat solve_charge_conjugation(const std::vector<Mat>& g) {
  const int n = static_cast<int>(g[0].rows());
  if (n > 8) return normalized_conjugation(charge_conjugation_from_products(g));
  const int nn = n * n;
  const Mat id = Mat::Identity(n, n);
  Mat transpose_perm = Mat::Zero(nn, nn);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) transpose_perm(j + n * i, i + n * j) = 1.0;
  Mat system(nn * (static_cast<int>(g.size()) + 1), nn);
  for (std::size_t a = 0; a < g.size(); ++a)
    system.middleRows(static_cast<int>(a) * nn, nn) =
        kron(id, g[a].transpose()) + kron(g[a].transpose(), id);
  system.bottomRows(nn) = transpose_perm + Mat::Identity(nn, nn);
  const Eigen::SelfAdjointEigenSolver<Mat> eig(system.adjoint() * system);
  const auto& ev = eig.eigenvalues();
  if (ev(0) > 1e-12 * ev(nn - 1) || (nn > 1 && ev(1) < 1e-8 * ev(nn - 1)))
    throw DimensionNotSupported("no unique antisymmetric charge conjugation matrix");
  return normalized_conjugation(eig.eigenvectors().col(0).reshaped(n, n));
}

}  // namespace detail

inline GammaSet build_gamma(int D) {
  if (!clifford_dimension_supported(D))
    throw DimensionNotSupported("dimension " + std::to_string(D) + " requires D mod 8 in {2,3,4}");
  GammaSet g;
  g.D = D;
  g.gammas = detail::raw_gammas(D);
  g.beta = I_unit * g.gammas[0];
  g.conj_C = detail::solve_charge_conjugation(g.gammas);
  return g;
}

inline Vec majorana_conjugate(const Vec& chi, const GammaSet& g) {
  if (chi.size() != g.spinor_dim()) throw ShapeMismatch("spinor length does not match gamma size");
  return g.conj_matrix() * chi.conjugate();
}

inline double majorana_reality_residual(const Vec& chi, const GammaSet& g) {
  return (chi - majorana_conjugate(chi, g)).norm();
}

// Orthonormal real basis of the fixed space of charge conjugation.
inline std::vector<Vec> majorana_basis(const GammaSet& g) {
  const int n = g.spinor_dim();
  const Mat jm = g.conj_matrix();
  const RMat a = jm.real(), b = jm.imag();
  RMat r(2 * n, 2 * n);
  r << a, b, b, -a;
  const RMat proj = 0.5 * (RMat::Identity(2 * n, 2 * n) + r);
  Eigen::JacobiSVD<RMat> svd(proj, Eigen::ComputeFullU);
  std::vector<Vec> basis;
  for (int j = 0; j < n; ++j) {
    const RVec u = svd.matrixU().col(j);
    Vec chi(n);
    for (int i = 0; i < n; ++i) chi(i) = cd(u(i), u(n + i));
    basis.push_back(chi);
  }
  return basis;
}

inline double majorana_pairing(const Vec& chi, const Vec& lambda, const GammaSet& g) {
  if (chi.size() != g.spinor_dim() || lambda.size() != g.spinor_dim())
    throw ShapeMismatch("spinor length does not match gamma size");
  for (const Vec* v : {&chi, &lambda})
    if (majorana_reality_residual(*v, g) > 1e-10 * std::max(1.0, v->norm()))
      throw NonMajoranaInput("spinor violates the Majorana reality condition");
  const cd value = I_unit * (chi.transpose() * g.conj_C * lambda)(0, 0);
  return value.real();
}

// Residual table for every convention identity of the gamma set.
inline Report gamma_audit(const GammaSet& g) {
  Report rep;
  rep.title = "gamma-audit D=" + std::to_string(g.D);
  const int n = g.spinor_dim();
  const Mat id = Mat::Identity(n, n);
  double anti = 0.0, herm = 0.0, ct = 0.0;
  for (int a = 0; a < g.D; ++a) {
    for (int b = 0; b < g.D; ++b) {
      const Mat lhs = g[a] * g[b] + g[b] * g[a];
      const Mat rhs = (a == b ? 2.0 * eta(a) : 0.0) * id;
      anti = std::max(anti, max_abs(lhs - rhs));
    }
    herm = std::max(herm, max_abs(g[a].adjoint() - (a == 0 ? -1.0 : 1.0) * g[a]));
    ct = std::max(ct, max_abs(g[a].transpose() + g.conj_C * g[a] * g.conj_C.inverse()));
  }
  rep.add("clifford_anticommutators", anti, 1e-12);
  rep.add("gamma_hermiticity", herm, 1e-12);
  rep.add("C_antisymmetric", max_abs(g.conj_C.transpose() + g.conj_C), 1e-10);
  rep.add("C_unitary", max_abs(g.conj_C.adjoint() * g.conj_C - id), 1e-10);
  rep.add("gamma_transpose_conjugation", ct, 1e-10);
  rep.add("beta_hermitian", max_abs(g.beta.adjoint() - g.beta), 1e-12);
  rep.add("beta_is_i_gamma0", max_abs(g.beta - I_unit * g[0]), 1e-12);
  const Mat jm = g.conj_matrix();
  rep.add("conjugation_involution", max_abs(jm * jm.conjugate() - id), 1e-10);
  double compat = 0.0;
  for (int a = 0; a < g.D; ++a) compat = std::max(compat, max_abs(jm * g[a].conjugate() - g[a] * jm));
  rep.add("gammas_commute_with_conjugation", compat, 1e-10);

  const auto basis = majorana_basis(g);
  RMat stacked(2 * n, n), pairing(n, n);
  double fixed = 0.0;
  for (int j = 0; j < n; ++j) {
    stacked.col(j) << basis[j].real(), basis[j].imag();
    fixed = std::max(fixed, majorana_reality_residual(basis[j], g));
    for (int l = 0; l < n; ++l) pairing(j, l) = majorana_pairing(basis[j], basis[l], g);
  }
  rep.add("majorana_basis_fixed", fixed, 1e-10);
  Eigen::JacobiSVD<RMat> sv(stacked);
  rep.add("majorana_basis_rank_deficit",
          static_cast<double>(n - (sv.singularValues().array() > 1e-10).count()), 0.0);
  rep.add("majorana_pairing_antisymmetric", (pairing + pairing.transpose()).cwiseAbs().maxCoeff(),
          1e-12);
  Eigen::JacobiSVD<RMat> sp(pairing);
  rep.note("majorana_pairing_min_singular_value", sp.singularValues()(n - 1));
  rep.add("majorana_pairing_nondegenerate",
          sp.singularValues()(n - 1) > 1e-10 ? 0.0 : 1.0, 0.0);
  return rep;
}

}  // namespace gaugelab
