#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "family.hpp"
#include "greens.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"
#include "report.hpp"
#include "theories.hpp"

namespace gaugelab {

// Representative f of a class [f] in Ker(Kdag) / P[compact sections].
struct ObservableClass {
  Section rep;
};

inline ObservableClass make_class(const GaugeTheory& th, Section f, double tol = 1e-10) {
  if (f.dim != th.V.dim) throw ShapeMismatch("class representative must be a section of V");
  if (!f.support().bounded()) throw InvalidArgument("class representative must be compactly supported");
  const double r = kernel_residual(th, f);
  if (r > tol) throw KernelMembershipViolation("representative is not in the kernel of Kdag");
  return {std::move(f)};
}

// Per-mode data of G f at the reference time: the causal solution G f has state U(t, 0) y, and
// <g, G h> = Vol sum_m dual(g)_m^H state(h)_m.
struct ClassMoments {
  std::map<int, Vec> state;
  std::map<int, Vec> dual;
};

class TauEvaluator {
 public:
  explicit TauEvaluator(const GaugeTheory& th) : th_(&th), g_(th, Op::Ptilde), herm_adj_(th.V.hermitian().adjoint()) {}
  TauEvaluator(const GaugeTheory& th, GreenOperator g)
      : th_(&th), g_(std::move(g)), herm_adj_(th.V.hermitian().adjoint()) {}

  const GreenOperator& green() const { return g_; }

  ClassMoments moments(const Section& f) const {
    ClassMoments out;
    for (const auto& [m, fn] : f.modes) {
      const Interval dom = fn->support();
      if (!dom.bounded()) throw InvalidArgument("moments need a compactly supported section");
      const ModeKernel& k = *g_.kernel(m);
      const int n = k.field_dim();
      const int ns = k.state_dim();
      Vec y = Vec::Zero(ns), d = Vec::Zero(ns);
      if (!dom.empty()) {
        const auto rule = quadrature(dom.lo, dom.hi, fn->breakpoints());
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double t = rule.nodes[q];
          const Vec v = fn->value(t);
          if (v.squaredNorm() == 0.0) continue;
          y += rule.weights[q] * k.reference_source(t, v);
          Vec lifted = Vec::Zero(ns);
          lifted.head(n) = herm_adj_ * v;
          d += (rule.weights[q] * th_->weight(t)) * k.from_reference_adjoint(t, lifted);
        }
      }
      out.state[m] = std::move(y);
      out.dual[m] = std::move(d);
    }
    return out;
  }

  cd value(const ClassMoments& f, const ClassMoments& h) const {
    cd total = 0.0;
    for (const auto& [m, d] : f.dual) {
      auto it = h.state.find(m);
      if (it != h.state.end()) total += d.dot(it->second);
    }
    return total * th_->volume();
  }

  cd value(const Section& f, const Section& h) const { return value(moments(f), moments(h)); }

 private:
  const GaugeTheory* th_;
  GreenOperator g_;
  Mat herm_adj_;
};

inline cd tau_complex(const GaugeTheory& th, const ObservableClass& f, const ObservableClass& h) {
  return TauEvaluator(th).value(f.rep, h.rep);
}

inline double tau(const GaugeTheory& th, const ObservableClass& f, const ObservableClass& h) {
  return tau_complex(th, f, h).real();
}

// <f, G h> by direct time quadrature of the pairing against the causal solution.
inline cd tau_direct(const GaugeTheory& th, const Section& f, const Section& h) {
  return pairing(th, th.V, f, GreenOperator(th, Op::Ptilde).apply(h, GreenKind::causal));
}

struct Signature {
  int positive = 0;
  int negative = 0;
  int null = 0;
};

struct PhaseSpace {
  std::vector<ObservableClass> basis;
  RMat gram;
  Signature signature;
  RVec eigenvalues;
  std::vector<std::vector<int>> blocks;
  double null_tolerance = 1e-8;
  double statistics_residual = 0.0;
  double imaginary_residual = 0.0;
  // Gap between the moment-matrix Gram used to select the basis and the quadrature Gram.
  double assembly_gap = 0.0;
  int cutoff = 0;
  Statistics statistics = Statistics::bosonic;
  std::vector<ClassMoments> moments;

  int size() const { return static_cast<int>(basis.size()); }
  bool positive_definite() const { return size() > 0 && signature.negative == 0 && signature.null == 0; }
};

namespace detail {

// Groups of basis elements connected through shared modes.
inline std::vector<std::vector<int>> mode_blocks(const std::vector<ClassMoments>& mom) {
  const int n = static_cast<int>(mom.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<int, int> owner;
  for (int i = 0; i < n; ++i)
    for (const auto& [m, v] : mom[i].state) {
      auto [it, fresh] = owner.emplace(m, i);
      if (!fresh) parent[find(i)] = find(it->second);
    }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups) out.push_back(std::move(g));
  return out;
}

}  // namespace detail

// Gram matrix of tau on the basis with its signature. Antisymmetric Grams (bosonic) are
// classified through the hermitian matrix i*Gram; the counts then give n+ = n- and n0.
inline PhaseSpace gram_signature(const GaugeTheory& th, std::vector<ObservableClass> basis, double tol = 1e-8) {
  PhaseSpace ps;
  ps.cutoff = th.spacetime.mode_cutoff;
  ps.statistics = th.statistics;
  ps.null_tolerance = tol;
  const TauEvaluator ev(th);
  for (const auto& b : basis) ps.moments.push_back(ev.moments(b.rep));
  ps.basis = std::move(basis);
  const int n = ps.size();
  ps.blocks = detail::mode_blocks(ps.moments);
  ps.gram = RMat::Zero(n, n);
  double imag = 0.0, scale = 0.0;
  for (const auto& blk : ps.blocks)
    for (int i : blk)
      for (int j : blk) {
        const cd v = ev.value(ps.moments[i], ps.moments[j]);
        ps.gram(i, j) = v.real();
        imag = std::max(imag, std::abs(v.imag()));
        scale = std::max(scale, std::abs(v));
      }
  ps.imaginary_residual = scale > 0.0 ? imag / scale : 0.0;
  const double sign = th.statistics == Statistics::bosonic ? 1.0 : -1.0;
  const double gn = n > 0 ? ps.gram.cwiseAbs().maxCoeff() : 0.0;
  ps.statistics_residual = gn > 0.0 ? (ps.gram + sign * ps.gram.transpose()).cwiseAbs().maxCoeff() / gn : 0.0;

  std::vector<double> evs;
  for (const auto& blk : ps.blocks) {
    const int b = static_cast<int>(blk.size());
    if (th.statistics == Statistics::bosonic) {
      Mat h(b, b);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) h(i, j) = I_unit * 0.5 * (ps.gram(blk[i], blk[j]) - ps.gram(blk[j], blk[i]));
      Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
      for (int i = 0; i < b; ++i) evs.push_back(es.eigenvalues()(i));
    } else {
      RMat s(b, b);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) s(i, j) = 0.5 * (ps.gram(blk[i], blk[j]) + ps.gram(blk[j], blk[i]));
      Eigen::SelfAdjointEigenSolver<RMat> es(s, Eigen::EigenvaluesOnly);
      for (int i = 0; i < b; ++i) evs.push_back(es.eigenvalues()(i));
    }
  }
  std::sort(evs.begin(), evs.end());
  ps.eigenvalues = Eigen::Map<const RVec>(evs.data(), static_cast<Eigen::Index>(evs.size()));
  double radius = 0.0;
  for (double e : evs) radius = std::max(radius, std::abs(e));
  for (double e : evs) {
    if (std::abs(e) <= tol * radius) ++ps.signature.null;
    else if (e > 0.0) ++ps.signature.positive;
    else ++ps.signature.negative;
  }
  return ps;
}

struct BasisOptions {
  int degree = 5;
  double center = 0.0;
  double halfwidth = 1.0;
  double keep = 1e-8;
  double null_tolerance = 1e-8;
  // Restrict to these mode indices (and their negatives); empty means every mode.
  std::vector<int> modes;
};

namespace detail {

struct ModeMoments {
  Mat state;  // state_dim x family size: y = state * c
  Mat dual;   // family size x state_dim: <f, G h> = Vol c_f^H dual y_h
};

inline ModeMoments mode_moments(const GaugeTheory& th, const ModeKernel& k, const BasisOptions& opt) {
  const int n = k.field_dim(), ns = k.state_dim(), np = opt.degree + 1;
  const Mat herm_adj = th.V.hermitian().adjoint();
  ModeMoments mm{Mat::Zero(ns, n * np), Mat::Zero(n * np, ns)};
  const double lo = opt.center - opt.halfwidth, hi = opt.center + opt.halfwidth;
  const auto rule = quadrature(lo, hi);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double t = rule.nodes[q];
    const double x = (t - opt.center) / opt.halfwidth;
    const double u = 1.0 - x * x;
    if (!(u > 0.0)) continue;
    const double env = std::exp(-1.0 / u);
    if (env == 0.0) continue;
    const Mat src = k.propagator(0.0, t) * k.input(t);
    Mat obs = Mat::Zero(ns, n);
    obs.topRows(n) = herm_adj;
    const Mat dual = k.propagator(t, 0.0).adjoint() * obs;  // U(t,0)^H E^H M^H
    double phi = env * rule.weights[q];
    for (int p = 0; p < np; ++p, phi *= x) {
      mm.state.middleCols(p * n, n) += phi * src;
      mm.dual.middleRows(p * n, n) += (phi * th.weight(t)) * dual.adjoint();
    }
  }
  return mm;
}

// Orthonormal basis of the states (Ke, d/dt Ke, ...) of pure-gauge solutions, e solving R e = 0.
inline Mat gauge_states(const GaugeTheory& th, int m) {
  const OperatorPoly& kop = th.op(Op::K, m);
  const int order = th.op(Op::Ptilde, m).order();
  const ConstantKernel rk(th.op(Op::R, m));
  const int nw = rk.field_dim(), nr = rk.state_dim(), nv = kop.rows();
  const Mat a = rk.generator(0.0);
  const int jets = kop.degree() + order;
  Mat out(nv * order, nr);
  for (int e = 0; e < nr; ++e) {
    std::vector<Vec> eps;
    Vec y = Vec::Unit(nr, e);
    for (int j = 0; j < jets; ++j) {
      eps.push_back(y.head(nw));
      y = a * y;
    }
    for (int l = 0; l < order; ++l) {
      Vec s = Vec::Zero(nv);
      for (int j = 0; j <= kop.degree(); ++j) s += kop.coeff(j) * eps[j + l];
      out.col(e).segment(l * nv, nv) = s;
    }
  }
  Eigen::JacobiSVD<Mat> svd(out, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv(r) > 1e-10 * std::max(1.0, sv(0))) ++r;
  return svd.matrixU().leftCols(r);
}

inline RMat realify(const Mat& y) {
  RMat r(2 * y.rows(), y.cols());
  r.topRows(y.rows()) = y.real();
  r.bottomRows(y.rows()) = y.imag();
  return r;
}

}  // namespace detail

// Basis of the phase space within the bump family: per pair of modes (k, -k), real sections in
// Ker(Kdag) whose Cauchy data are independent modulo pure gauge, orthonormalized in the
// Cauchy-data metric with rank-revealing tolerance `keep`.
inline PhaseSpace build_phase_space(const GaugeTheory& th, const BasisOptions& opt = {}) {
  const GreenOperator g(th, Op::Ptilde);
  const int dim = th.V.dim, np = opt.degree + 1, nfam = dim * np;
  const Mat jfull = kron(Mat::Identity(np, np), th.V.conj);
  const BumpProfile shape(opt.center, opt.halfwidth, Mat::Zero(dim, np));
  std::vector<int> wanted;
  if (opt.modes.empty()) {
    wanted.resize(th.mode_count());
    std::iota(wanted.begin(), wanted.end(), 0);
  } else {
    wanted = opt.modes;
  }
  std::vector<bool> done(th.mode_count(), false);
  std::vector<ObservableClass> basis;
  std::vector<std::pair<int, Mat>> moment_data;  // per basis element: (sector mode, coefficients)
  double moment_gram_scale = 0.0;
  std::vector<std::vector<cd>> moment_gram_rows;
  std::vector<std::vector<int>> moment_blocks;
  std::map<int, detail::ModeMoments> cache;

  for (int m : wanted) {
    if (m < 0 || m >= th.mode_count()) throw InvalidArgument("mode index out of range");
    const int neg = th.lattice.negation[m];
    if (done[m]) continue;
    done[m] = done[neg] = true;
    const ModeKernel& k = *g.kernel(m);
    Mat z = Mat::Identity(nfam, nfam);
    if (th.gauge) z = null_space(detail::family_operator_matrix(th.op(Op::Kdag, m), shape), 1e-12);
    if (z.cols() == 0) continue;
    const auto mm = detail::mode_moments(th, k, opt);
    Mat proj = Mat::Identity(k.state_dim(), k.state_dim());
    if (th.gauge) {
      const Mat gs = detail::gauge_states(th, m);
      proj -= gs * gs.adjoint();
    }
    // Real candidates: (v, J conj v) and (i v, -i J conj v); a single self-conjugate mode uses
    // v + J conj v and i v - i J conj v.
    const int nz = static_cast<int>(z.cols());
    Mat cand(nfam, 2 * nz);
    for (int j = 0; j < nz; ++j) {
      if (neg == m) {
        cand.col(2 * j) = z.col(j) + jfull * z.col(j).conjugate();
        cand.col(2 * j + 1) = I_unit * z.col(j) - I_unit * (jfull * z.col(j).conjugate());
      } else {
        cand.col(2 * j) = z.col(j);
        cand.col(2 * j + 1) = I_unit * z.col(j);
      }
    }
    const Mat states = mm.state * cand;
    const RMat raw = detail::realify(states);
    const RMat projected = detail::realify(proj * states);
    Eigen::JacobiSVD<RMat> svd(projected, Eigen::ComputeThinV);
    const double ref = Eigen::JacobiSVD<RMat>(raw).singularValues()(0);
    const auto& sv = svd.singularValues();
    int r = 0;
    while (r < sv.size() && sv(r) > opt.keep * ref) ++r;
    if (r == 0) continue;
    const RMat comb = svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal();
    const Mat coeffs = cand * comb.cast<cd>();
    std::vector<int> blk;
    for (int e = 0; e < r; ++e) {
      const Vec c = coeffs.col(e);
      Section f;
      f.dim = dim;
      f.modes[m] = make_fn<BumpProfile>(opt.center, opt.halfwidth, c.reshaped(dim, np));
      if (neg != m)
        f.modes[neg] = make_fn<BumpProfile>(opt.center, opt.halfwidth, Vec(jfull * c.conjugate()).reshaped(dim, np));
      blk.push_back(static_cast<int>(basis.size()));
      basis.push_back(make_class(th, std::move(f)));
      moment_data.emplace_back(m, c);
    }
    // Moment-matrix Gram of the sector: the mode -k contributes the complex conjugate for real data.
    const Mat s = mm.dual.adjoint() * coeffs;
    const Mat y = mm.state * coeffs;
    Mat sector = th.volume() * s.adjoint() * y;
    if (neg != m) sector = sector + sector.conjugate();
    for (int i = 0; i < r; ++i) {
      std::vector<cd> row(r);
      for (int j = 0; j < r; ++j) row[j] = sector(i, j);
      moment_gram_rows.push_back(std::move(row));
    }
    moment_blocks.push_back(std::move(blk));
    moment_gram_scale = std::max(moment_gram_scale, max_abs(sector));
  }

  PhaseSpace ps = gram_signature(th, std::move(basis), opt.null_tolerance);
  double gap = 0.0;
  int row = 0;
  for (const auto& blk : moment_blocks)
    for (std::size_t i = 0; i < blk.size(); ++i, ++row)
      for (std::size_t j = 0; j < blk.size(); ++j)
        gap = std::max(gap, std::abs(moment_gram_rows[row][j] - ps.gram(blk[i], blk[j])));
  ps.assembly_gap = moment_gram_scale > 0.0 ? gap / moment_gram_scale : 0.0;
  return ps;
}

// Combination sum_i c_i basis_i.
inline Section combine_basis(const PhaseSpace& ps, const RVec& c) {
  Section out;
  for (int i = 0; i < ps.size(); ++i)
    if (c(i) != 0.0) out = combine(1.0, out, c(i), ps.basis[i].rep);
  return out;
}

struct NormWitness {
  ObservableClass direction;
  double value = 0.0;  // tau([f], [f]) for the unit eigenvector
  bool null = false;   // no negative direction, but a null one
};

// Most negative Rayleigh direction of a symmetric Gram; a null direction is reported with
// `null` set when the Gram is only semidefinite; none when it is positive definite.
inline std::optional<NormWitness> negative_norm_witness(const GaugeTheory& th, const PhaseSpace& ps) {
  if (th.statistics != Statistics::fermionic || ps.size() == 0) return std::nullopt;
  const RMat sym = 0.5 * (ps.gram + ps.gram.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(sym);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lowest = es.eigenvalues()(0);
  if (lowest > ps.null_tolerance * radius) return std::nullopt;
  const RVec v = es.eigenvectors().col(0);
  return NormWitness{ObservableClass{combine_basis(ps, v)}, lowest, lowest >= -ps.null_tolerance * radius};
}

// Largest |tau(f - h, b)| over the basis, relative to the size of the pairings of f.
inline double class_distance(const GaugeTheory& th, const PhaseSpace& ps, const Section& f, const Section& h) {
  const TauEvaluator ev(th);
  const ClassMoments mf = ev.moments(f), mh = ev.moments(h);
  double num = 0.0, den = 0.0;
  for (const auto& b : ps.moments) {
    const cd a = ev.value(mf, b), c = ev.value(mh, b);
    num = std::max(num, std::abs(a - c));
    den = std::max({den, std::abs(a), std::abs(c)});
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace gaugelab
