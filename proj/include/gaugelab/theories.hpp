#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "clifford.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "poly.hpp"
#include "profile.hpp"
#include "report.hpp"
#include "spacetime.hpp"

namespace gaugelab {

enum class Statistics { bosonic, fermionic };
enum class Symmetry { symmetric, antisymmetric };

// Real (or Majorana-real) fiber: bilinear form b(u, v) = u^T form v on vectors fixed by the
// antilinear conjugation u -> conj * conj(u). Complex mode data pair through hermitian().
struct FiberSpec {
  int dim = 0;
  Mat form;
  Symmetry symmetry = Symmetry::symmetric;
  Mat conj;

  Mat hermitian() const { return conj.transpose() * form; }
};

inline FiberSpec make_fiber(const Mat& form, const Mat& conj) {
  const int n = static_cast<int>(form.rows());
  if (form.cols() != n || conj.rows() != n || conj.cols() != n) throw ShapeMismatch("fiber matrices must be square");
  Eigen::JacobiSVD<Mat> svd(form);
  if (svd.singularValues()(n - 1) <= 1e-10) throw InvalidArgument("degenerate fiber form");
  FiberSpec f{n, form, Symmetry::symmetric, conj};
  const double scale = max_abs(form);
  if (max_abs(form.transpose() - form) <= 1e-12 * scale) f.symmetry = Symmetry::symmetric;
  else if (max_abs(form.transpose() + form) <= 1e-12 * scale) f.symmetry = Symmetry::antisymmetric;
  else throw InvalidArgument("fiber form neither symmetric nor antisymmetric");
  return f;
}

enum class Op { P, K, Kdag, T, Ptilde, Q, R };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::P: return "P";
    case Op::K: return "K";
    case Op::Kdag: return "Kdag";
    case Op::T: return "T";
    case Op::Ptilde: return "Ptilde";
    case Op::Q: return "Q";
    case Op::R: return "R";
  }
  return "?";
}

struct ModeOperators {
  OperatorPoly P, K, Kdag, T, Ptilde, Q, R;

  const OperatorPoly& get(Op op) const {
    switch (op) {
      case Op::P: return P;
      case Op::K: return K;
      case Op::Kdag: return Kdag;
      case Op::T: return T;
      case Op::Ptilde: return Ptilde;
      case Op::Q: return Q;
      case Op::R: return R;
    }
    throw InvalidArgument("unknown operator");
  }
  void derive() {
    Ptilde = P + T * Kdag;
    Q = Kdag * T;
    R = Kdag * K;
  }
};

struct GaugeTheory {
  std::string name;
  Spacetime spacetime;
  SpinStructure spin;
  ModeLattice lattice;
  FiberSpec V, W;
  Statistics statistics = Statistics::bosonic;
  bool gauge = false;
  std::vector<ModeOperators> ops;
  std::shared_ptr<const GammaSet> gamma;
  // Non-flat backgrounds: coefficients of P (= Ptilde) at time t on a mode.
  std::function<OperatorPoly(int, double)> ptilde_at_time;

  int mode_count() const { return lattice.size(); }
  bool time_dependent() const { return static_cast<bool>(ptilde_at_time); }
  double volume() const { return spacetime.volume(); }
  double weight(double t) const { return spacetime.volume_density(t); }

  const FiberSpec& source(Op op) const {
    return (op == Op::K || op == Op::T || op == Op::Q || op == Op::R) ? W : V;
  }
  const FiberSpec& target(Op op) const {
    return (op == Op::Kdag || op == Op::Q || op == Op::R) ? W : V;
  }
  const OperatorPoly& op(Op o, int mode) const { return ops.at(mode).get(o); }
};

namespace detail {

inline GaugeTheory theory_shell(std::string name, const Spacetime& st, const SpinStructure& ss) {
  GaugeTheory th;
  th.name = std::move(name);
  th.spacetime = st;
  th.spin = ss;
  th.lattice = mode_lattice(st, ss);
  return th;
}

// Exterior derivative on functions, codifferential and delta-d on one-forms, per mode.
struct FormOperators {
  OperatorPoly d0;     // functions -> one-forms, D x 1
  OperatorPoly delta;  // one-forms -> functions, 1 x D
  OperatorPoly deltad; // one-forms -> one-forms, D x D
};

inline OperatorPoly block(const std::vector<std::vector<OperatorPoly>>& entries, int rows_each, int cols_each) {
  const int br = static_cast<int>(entries.size());
  const int bc = static_cast<int>(entries[0].size());
  int deg = 0;
  for (const auto& r : entries)
    for (const auto& e : r) deg = std::max(deg, e.degree());
  std::vector<Mat> c(deg + 1, Mat::Zero(br * rows_each, bc * cols_each));
  for (int i = 0; i < br; ++i)
    for (int j = 0; j < bc; ++j)
      for (int p = 0; p <= entries[i][j].degree(); ++p)
        c[p].block(i * rows_each, j * cols_each, rows_each, cols_each) = entries[i][j].coeff(p);
  return OperatorPoly(std::move(c));
}

inline FormOperators form_operators(int D, const RVec& k) {
  std::vector<std::vector<OperatorPoly>> dcol(D, std::vector<OperatorPoly>(1));
  std::vector<std::vector<OperatorPoly>> drow(1, std::vector<OperatorPoly>(D));
  for (int mu = 0; mu < D; ++mu) {
    dcol[mu][0] = mode_derivative(mu, k);
    drow[0][mu] = mode_derivative(mu, k) * cd(-eta(mu));
  }
  FormOperators f;
  f.d0 = block(dcol, 1, 1);
  f.delta = block(drow, 1, 1);
  // (delta d A)_nu = -d^mu (d_mu A_nu - d_nu A_mu)
  std::vector<std::vector<OperatorPoly>> e(D, std::vector<OperatorPoly>(D));
  OperatorPoly box = OperatorPoly::zero(1, 1);
  for (int mu = 0; mu < D; ++mu) box = box + mode_derivative(mu, k) * mode_derivative(mu, k) * cd(eta(mu));
  for (int nu = 0; nu < D; ++nu)
    for (int mu = 0; mu < D; ++mu) {
      OperatorPoly entry = mode_derivative(mu, k) * mode_derivative(nu, k) * cd(eta(mu));
      if (mu == nu) entry = entry - box;
      e[nu][mu] = entry;
    }
  f.deltad = block(e, 1, 1);
  return f;
}

inline OperatorPoly wave_operator(int D, const RVec& k) {
  OperatorPoly box = OperatorPoly::zero(1, 1);
  for (int mu = 0; mu < D; ++mu) box = box + mode_derivative(mu, k) * mode_derivative(mu, k) * cd(eta(mu));
  return box;
}

inline Mat minkowski(int D) {
  Mat m = Mat::Zero(D, D);
  for (int mu = 0; mu < D; ++mu) m(mu, mu) = eta(mu);
  return m;
}

inline void require_flat(const Spacetime& st, const char* model) {
  if (!st.is_flat()) throw InvalidArgument(std::string(model) + " requires a flat torus background");
}

inline void finish(GaugeTheory& th) {
  for (auto& o : th.ops) o.derive();
}

// Majorana fiber with the pairing -i u^T C v.
inline FiberSpec majorana_fiber(const GammaSet& g) {
  return make_fiber(-I_unit * g.conj_C, g.conj_matrix());
}

}  // namespace detail

inline GaugeTheory klein_gordon(const Spacetime& st, double mass) {
  if (mass < 0.0) throw InvalidArgument("negative mass");
  GaugeTheory th = detail::theory_shell("klein_gordon", st, SpinStructure::trivial_for(st.dim()));
  const Mat one = Mat::Identity(1, 1);
  th.V = th.W = make_fiber(one, one);
  th.statistics = Statistics::bosonic;
  for (int m = 0; m < th.mode_count(); ++m) {
    const double k2 = th.lattice.momenta[m].squaredNorm();
    ModeOperators o;
    o.P = OperatorPoly(std::vector<Mat>{one * (k2 + mass * mass), Mat::Zero(1, 1), one});
    o.K = o.Kdag = o.T = OperatorPoly::zero(1, 1);
    th.ops.push_back(o);
  }
  detail::finish(th);
  if (!st.is_flat()) {
    const ModeLattice lat = th.lattice;
    const FrwCircle frw = st.frw();
    th.ptilde_at_time = [lat, frw, mass](int m, double t) {
      const double a = frw.scale(t);
      const double k2 = lat.momenta[m].squaredNorm();
      std::vector<Mat> c{Mat::Constant(1, 1, k2 / (a * a) + mass * mass), Mat::Constant(1, 1, frw.scale_rate(t) / a),
                         Mat::Identity(1, 1)};
      return OperatorPoly(std::move(c));
    };
  }
  return th;
}

inline GaugeTheory majorana_matter(const Spacetime& st, const SpinStructure& ss, double mass) {
  detail::require_flat(st, "majorana_matter");
  auto g = std::make_shared<const GammaSet>(build_gamma(st.dim()));
  GaugeTheory th = detail::theory_shell("majorana", st, ss);
  th.gamma = g;
  th.V = th.W = detail::majorana_fiber(*g);
  th.statistics = Statistics::fermionic;
  const int n = g->spinor_dim();
  for (int m = 0; m < th.mode_count(); ++m) {
    ModeOperators o;
    const Mat c0 = I_unit * g->spatial_slash(th.lattice.momenta[m]) + mass * Mat::Identity(n, n);
    o.P = OperatorPoly(std::vector<Mat>{c0, (*g)[0]});
    o.K = o.Kdag = o.T = OperatorPoly::zero(n, n);
    th.ops.push_back(o);
  }
  detail::finish(th);
  return th;
}

// Killing form -f_acd f_bdc ... computed as K_ab = sum_{c,d} f_acd f_bdc.
inline RMat killing_form(const std::vector<RMat>& structure_constants) {
  const int n = static_cast<int>(structure_constants.size());
  RMat k = RMat::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) k(a, b) += structure_constants[a](c, d) * structure_constants[b](d, c);
  return k;
}

// su(2) with [e_a, e_b] = eps_abc e_c; structure_constants[a](c, b) = eps_abc.
inline std::vector<RMat> su2_structure_constants() {
  std::vector<RMat> f(3, RMat::Zero(3, 3));
  auto eps = [](int a, int b, int c) { return 0.5 * (a - b) * (b - c) * (c - a); };
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) f[a](c, b) = eps(a, b, c);
  return f;
}

inline GaugeTheory yang_mills_linear(const Spacetime& st, const RMat& killing) {
  detail::require_flat(st, "yang_mills_linear");
  const int ng = static_cast<int>(killing.rows());
  if (ng < 1 || killing.cols() != ng) throw ShapeMismatch("Killing matrix must be square");
  if (std::abs(killing.determinant()) < 1e-12 || (killing - killing.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidArgument("degenerate or non-symmetric Killing matrix");
  const int D = st.dim();
  GaugeTheory th = detail::theory_shell("yang_mills", st, SpinStructure::trivial_for(D));
  const Mat kap = killing.cast<cd>();
  th.V = make_fiber(kron(kap, detail::minkowski(D)), Mat::Identity(ng * D, ng * D));
  th.W = make_fiber(kap, Mat::Identity(ng, ng));
  th.statistics = Statistics::bosonic;
  th.gauge = true;
  const Mat id = Mat::Identity(ng, ng);
  for (int m = 0; m < th.mode_count(); ++m) {
    const auto f = detail::form_operators(D, th.lattice.momenta[m]);
    ModeOperators o;
    o.P = kron(id, f.deltad);
    o.K = kron(id, f.d0);
    o.Kdag = kron(id, f.delta);
    o.T = o.K;
    th.ops.push_back(o);
  }
  detail::finish(th);
  return th;
}

inline GaugeTheory yang_mills_linear(const Spacetime& st) {
  return yang_mills_linear(st, killing_form(su2_structure_constants()));
}

namespace detail {

// Symmetric two-tensors: 10 independent components (mu <= nu) embedded in the 16 of T*M (x) T*M.
struct SymmetricTensorMaps {
  Mat embed;    // 16 x 10
  Mat project;  // 10 x 16, symmetrize then read (mu <= nu)
};

inline SymmetricTensorMaps symmetric_tensor_maps(int D) {
  const int nsym = D * (D + 1) / 2;
  SymmetricTensorMaps s{Mat::Zero(D * D, nsym), Mat::Zero(nsym, D * D)};
  int c = 0;
  for (int mu = 0; mu < D; ++mu)
    for (int nu = mu; nu < D; ++nu, ++c) {
      s.embed(mu * D + nu, c) = 1.0;
      s.embed(nu * D + mu, c) = 1.0;
      s.project(c, mu * D + nu) += 0.5;
      s.project(c, nu * D + mu) += 0.5;
    }
  return s;
}

}  // namespace detail

// Trace reversal h -> h - (1/2) g tr(h) on the D x D tensor components.
inline Mat trace_reversal(int D) {
  Mat metric = Mat::Zero(D * D, 1);
  for (int mu = 0; mu < D; ++mu) metric(mu * D + mu) = eta(mu);
  return Mat::Identity(D * D, D * D) - 0.5 * metric * metric.transpose();
}

inline GaugeTheory linearised_gr(const Spacetime& st) {
  detail::require_flat(st, "linearised_gr");
  const int D = st.dim();
  if (D != 4) throw DimensionNotSupported("linearised gravity is provided for D = 4 only");
  GaugeTheory th = detail::theory_shell("linearised_gr", st, SpinStructure::trivial_for(D));
  const auto sym = detail::symmetric_tensor_maps(D);
  // f^{mu nu} h_{mu nu} - (1/2) f h on the 16 components.
  Mat form16 = Mat::Zero(D * D, D * D);
  Mat trace = Mat::Zero(D * D, 1);
  for (int mu = 0; mu < D; ++mu) {
    trace(mu * D + mu) = eta(mu);
    for (int nu = 0; nu < D; ++nu) form16(mu * D + nu, mu * D + nu) = eta(mu) * eta(nu);
  }
  form16 -= 0.5 * trace * trace.transpose();
  const int nsym = static_cast<int>(sym.embed.cols());
  th.V = make_fiber(sym.embed.transpose() * form16 * sym.embed, Mat::Identity(nsym, nsym));
  th.W = make_fiber(detail::minkowski(D), Mat::Identity(D, D));
  th.statistics = Statistics::bosonic;
  th.gauge = true;
  auto idx = [D](int mu, int nu) { return mu * D + nu; };
  for (int m = 0; m < th.mode_count(); ++m) {
    const RVec& k = th.lattice.momenta[m];
    auto dd = [&](int mu) { return mode_derivative(mu, k); };
    std::vector<std::vector<OperatorPoly>> p(D * D, std::vector<OperatorPoly>(D * D, OperatorPoly::zero(1, 1)));
    const OperatorPoly box = detail::wave_operator(D, k);
    for (int mu = 0; mu < D; ++mu)
      for (int nu = 0; nu < D; ++nu) {
        auto& row = p[idx(mu, nu)];
        if (mu == nu)
          for (int r = 0; r < D; ++r)
            for (int s = 0; s < D; ++s) row[idx(r, s)] = row[idx(r, s)] + dd(r) * dd(s) * cd(eta(mu) * eta(r) * eta(s));
        row[idx(mu, nu)] = row[idx(mu, nu)] + box;
        for (int r = 0; r < D; ++r) {
          row[idx(nu, r)] = row[idx(nu, r)] - dd(r) * dd(mu) * cd(eta(r));
          row[idx(mu, r)] = row[idx(mu, r)] - dd(r) * dd(nu) * cd(eta(r));
        }
      }
    std::vector<std::vector<OperatorPoly>> kk(D * D, std::vector<OperatorPoly>(D, OperatorPoly::zero(1, 1)));
    for (int mu = 0; mu < D; ++mu)
      for (int nu = 0; nu < D; ++nu) {
        auto& row = kk[idx(mu, nu)];
        row[nu] = row[nu] + dd(mu) * cd(0.5);
        row[mu] = row[mu] + dd(nu) * cd(0.5);
        if (mu == nu)
          for (int r = 0; r < D; ++r) row[r] = row[r] - dd(r) * cd(0.5 * eta(mu) * eta(r));
      }
    std::vector<std::vector<OperatorPoly>> kd(D, std::vector<OperatorPoly>(D * D, OperatorPoly::zero(1, 1)));
    for (int mu = 0; mu < D; ++mu)
      for (int nu = 0; nu < D; ++nu) kd[mu][idx(mu, nu)] = dd(nu) * cd(-eta(nu));
    ModeOperators o;
    o.P = sym.project * detail::block(p, 1, 1) * OperatorPoly::constant(sym.embed);
    o.K = sym.project * detail::block(kk, 1, 1);
    o.Kdag = detail::block(kd, 1, 1) * OperatorPoly::constant(sym.embed);
    o.T = o.K * cd(-2.0);
    th.ops.push_back(o);
  }
  detail::finish(th);
  return th;
}

// Standard symplectic form on R^{2m}: blocks [[0, 1], [-1, 0]].
inline Mat standard_symplectic(int m_pairs) {
  Mat om = Mat::Zero(2 * m_pairs, 2 * m_pairs);
  for (int p = 0; p < m_pairs; ++p) {
    om(2 * p, 2 * p + 1) = 1.0;
    om(2 * p + 1, 2 * p) = -1.0;
  }
  return om;
}

// Fiberwise flip with B^T Omega B = -Omega: blocks [[0, 1], [1, 0]].
inline Mat symplectic_flip(int m_pairs) {
  Mat b = Mat::Zero(2 * m_pairs, 2 * m_pairs);
  for (int p = 0; p < m_pairs; ++p) {
    b(2 * p, 2 * p + 1) = 1.0;
    b(2 * p + 1, 2 * p) = 1.0;
  }
  return b;
}

inline GaugeTheory toy_fermionic(const Spacetime& st, int m_pairs) {
  detail::require_flat(st, "toy_fermionic");
  if (m_pairs < 1) throw InvalidArgument("toy model needs at least one symplectic pair");
  const int D = st.dim();
  const int nw = 2 * m_pairs;
  GaugeTheory th = detail::theory_shell("toy_fermionic", st, SpinStructure::trivial_for(D));
  const Mat om = standard_symplectic(m_pairs);
  th.V = make_fiber(kron(om, detail::minkowski(D)), Mat::Identity(nw * D, nw * D));
  th.W = make_fiber(om, Mat::Identity(nw, nw));
  th.statistics = Statistics::fermionic;
  th.gauge = true;
  const Mat id = Mat::Identity(nw, nw);
  for (int m = 0; m < th.mode_count(); ++m) {
    const auto f = detail::form_operators(D, th.lattice.momenta[m]);
    ModeOperators o;
    o.P = kron(id, f.deltad);
    o.K = kron(id, f.d0);
    o.Kdag = kron(id, f.delta);
    o.T = o.K;
    th.ops.push_back(o);
  }
  detail::finish(th);
  return th;
}

namespace detail {

// gamma^mu psi_mu as a map from the vector-spinor fiber (index mu * n + a) to spinors.
inline Mat gamma_trace_map(const GammaSet& g) {
  const int n = g.spinor_dim();
  Mat m(n, g.D * n);
  for (int mu = 0; mu < g.D; ++mu) m.middleCols(mu * n, n) = g[mu];
  return m;
}

inline OperatorPoly dirac_operator(const GammaSet& g, const RVec& k) {
  return OperatorPoly(std::vector<Mat>{I_unit * g.spatial_slash(k), g[0]});
}

}  // namespace detail

inline GaugeTheory rarita_schwinger(const Spacetime& st, const SpinStructure& ss) {
  detail::require_flat(st, "rarita_schwinger");
  const int D = st.dim();
  if (D < 3 || !clifford_dimension_supported(D)) throw DimensionNotSupported("Rarita-Schwinger needs D >= 3, D mod 8 in {2,3,4}");
  auto g = std::make_shared<const GammaSet>(build_gamma(D));
  GaugeTheory th = detail::theory_shell("rarita_schwinger", st, ss);
  th.gamma = g;
  const int n = g->spinor_dim();
  th.W = detail::majorana_fiber(*g);
  const Mat tr = detail::gamma_trace_map(*g);
  th.V = make_fiber(kron(detail::minkowski(D), th.W.form) + (1.0 / (D - 2)) * tr.transpose() * th.W.form * tr,
                    kron(Mat::Identity(D, D), th.W.conj));
  th.statistics = Statistics::fermionic;
  th.gauge = true;
  const Mat sid = Mat::Identity(n, n);
  for (int m = 0; m < th.mode_count(); ++m) {
    const RVec& k = th.lattice.momenta[m];
    const OperatorPoly dirac = detail::dirac_operator(*g, k);
    std::vector<std::vector<OperatorPoly>> p(D, std::vector<OperatorPoly>(D, OperatorPoly::zero(n, n)));
    std::vector<std::vector<OperatorPoly>> kk(D, std::vector<OperatorPoly>(1));
    std::vector<std::vector<OperatorPoly>> kd(1, std::vector<OperatorPoly>(D));
    std::vector<std::vector<OperatorPoly>> t(D, std::vector<OperatorPoly>(1));
    for (int mu = 0; mu < D; ++mu) {
      const Mat lower = eta(mu) * (*g)[mu];
      p[mu][mu] = p[mu][mu] + dirac;
      for (int nu = 0; nu < D; ++nu) p[mu][nu] = p[mu][nu] - kron(lower, mode_derivative(nu, k)) * cd(eta(nu));
      kk[mu][0] = kron(sid, mode_derivative(mu, k)) - lower * dirac * cd(0.5);
      kd[0][mu] = kron(sid, mode_derivative(mu, k)) * cd(-eta(mu));
      t[mu][0] = OperatorPoly::constant(-lower);
    }
    ModeOperators o;
    o.P = detail::block(p, n, n);
    o.K = detail::block(kk, n, n);
    o.Kdag = detail::block(kd, n, n);
    o.T = detail::block(t, n, n);
    th.ops.push_back(o);
  }
  detail::finish(th);
  return th;
}

// ---------------------------------------------------------------------------------------------
// Sections, operator application and pairings.

inline Section apply(const GaugeTheory& th, Op op, const Section& f) {
  if (f.dim != th.source(op).dim) throw ShapeMismatch(std::string("section does not live on the source of ") + op_name(op));
  Section out;
  out.dim = th.target(op).dim;
  for (const auto& [m, fn] : f.modes) {
    if (th.time_dependent() && (op == Op::P || op == Op::Ptilde)) {
      const auto coeffs = th.ptilde_at_time;
      const int mode = m;
      out.modes[m] = make_fn<TimeDependentApplied>([coeffs, mode](double t) { return coeffs(mode, t); },
                                                   out.dim, fn);
      continue;
    }
    const OperatorPoly& l = th.op(op, m);
    if (const auto* b = dynamic_cast<const BumpProfile*>(fn.get()))
      out.modes[m] = make_fn<BumpProfile>(b->applied(l));
    else
      out.modes[m] = make_fn<AppliedFunction>(l, fn);
  }
  return out;
}

inline Section transform(const Section& f, const Mat& fiber_map) {
  Section out;
  out.dim = static_cast<int>(fiber_map.rows());
  for (const auto& [m, fn] : f.modes) {
    if (const auto* b = dynamic_cast<const BumpProfile*>(fn.get()))
      out.modes[m] = make_fn<BumpProfile>(b->transformed(fiber_map));
    else
      out.modes[m] = make_fn<MappedFunction>(fiber_map, fn);
  }
  return out;
}

// sum_k Vol int weight(t) f_k^H M h_k dt with M the hermitian matrix of the fiber.
inline cd pairing(const GaugeTheory& th, const FiberSpec& fiber, const Section& f, const Section& h) {
  if (f.dim != fiber.dim || h.dim != fiber.dim) throw ShapeMismatch("section does not live on the fiber");
  const Mat herm = fiber.hermitian();
  cd total = 0.0;
  for (const auto& [m, fn] : f.modes) {
    auto it = h.modes.find(m);
    if (it == h.modes.end()) continue;
    const Interval dom = fn->support().intersect(it->second->support());
    if (dom.empty()) continue;
    if (!dom.bounded()) throw InvalidArgument("pairing needs a compactly supported argument");
    const FunctionPtr& hn = it->second;
    std::vector<double> breaks = fn->breakpoints();
    append_breakpoints(breaks, *hn);
    total += integrate([&](double t) { return th.weight(t) * fn->value(t).dot(herm * hn->value(t)); }, dom.lo, dom.hi,
                       breaks);
  }
  return total * th.volume();
}

// L2 norm with the Euclidean fiber metric, used to scale residuals.
inline double l2_norm(const GaugeTheory& th, const Section& f) {
  double total = 0.0;
  for (const auto& [m, fn] : f.modes) {
    const Interval dom = fn->support();
    if (!dom.bounded()) throw InvalidArgument("norm needs a compactly supported argument");
    total +=
        integrate([&](double t) { return th.weight(t) * fn->value(t).squaredNorm(); }, dom.lo, dom.hi, fn->breakpoints());
  }
  return std::sqrt(total * th.volume());
}

struct RandomSectionOptions {
  int modes = 3;
  int degree = 2;
  double center_lo = -2.0;
  double center_hi = 2.0;
  double width_lo = 0.8;
  double width_hi = 1.4;
};

// Random compactly supported section, real in the sense of the fiber conjugation: the mode -k
// component is the conjugation image of the mode k component.
inline Section random_section(const GaugeTheory& th, const FiberSpec& fiber, std::mt19937_64& rng,
                              const RandomSectionOptions& opt = {}) {
  std::uniform_int_distribution<int> pick(0, th.mode_count() - 1);
  std::uniform_real_distribution<double> centre(opt.center_lo, opt.center_hi), width(opt.width_lo, opt.width_hi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Section f;
  f.dim = fiber.dim;
  for (int i = 0; i < opt.modes; ++i) {
    const int m = pick(rng);
    if (f.modes.count(m)) continue;
    Mat c(fiber.dim, opt.degree + 1);
    for (int r = 0; r < c.rows(); ++r)
      for (int p = 0; p < c.cols(); ++p) c(r, p) = cd(gauss(rng), gauss(rng));
    const BumpProfile b(centre(rng), width(rng), c);
    const int neg = th.lattice.negation[m];
    if (neg == m) {
      f.modes[m] = make_fn<BumpProfile>(b.plus(b.conjugated(fiber.conj)).scaled(0.5));
    } else {
      f.modes[m] = make_fn<BumpProfile>(b);
      f.modes[neg] = make_fn<BumpProfile>(b.conjugated(fiber.conj));
    }
  }
  return f;
}

// ---------------------------------------------------------------------------------------------
// Axiom checks.

inline double relative_poly_residual(const OperatorPoly& diff, double scale) {
  return diff.norm() / std::max(scale, 1e-300);
}

inline Report verify_axioms(const GaugeTheory& th, int trials, std::uint64_t seed = 1) {
  Report rep;
  rep.title = "axioms " + th.name;
  std::mt19937_64 rng(seed);
  double sa = 0.0, kadj = 0.0, pk_app = 0.0, id1_app = 0.0, id2_app = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Section f = random_section(th, th.V, rng), h = random_section(th, th.V, rng);
    const Section pf = apply(th, Op::P, f), ph = apply(th, Op::P, h);
    const double scale = l2_norm(th, pf) * l2_norm(th, h) + l2_norm(th, f) * l2_norm(th, ph);
    sa = std::max(sa, std::abs(pairing(th, th.V, pf, h) - pairing(th, th.V, f, ph)) / scale);
    if (!th.gauge) continue;
    const Section e = random_section(th, th.W, rng);
    const Section ke = apply(th, Op::K, e), kdf = apply(th, Op::Kdag, f);
    const double ks = l2_norm(th, ke) * l2_norm(th, f) + l2_norm(th, e) * l2_norm(th, kdf);
    kadj = std::max(kadj, std::abs(pairing(th, th.V, ke, f) - pairing(th, th.W, e, kdf)) / ks);
    pk_app = std::max(pk_app, l2_norm(th, apply(th, Op::P, ke)) / std::max(l2_norm(th, ke), 1e-300));
    const Section a = apply(th, Op::Kdag, apply(th, Op::Ptilde, f));
    const Section b = apply(th, Op::Q, kdf);
    id1_app = std::max(id1_app, l2_norm(th, combine(1.0, a, -1.0, b)) / std::max(l2_norm(th, a), 1e-300));
    const Section c = apply(th, Op::Ptilde, ke), d = apply(th, Op::T, apply(th, Op::R, e));
    id2_app = std::max(id2_app, l2_norm(th, combine(1.0, c, -1.0, d)) / std::max(l2_norm(th, c), 1e-300));
  }
  rep.add("P_formally_self_adjoint", sa, 1e-10);
  if (th.gauge) {
    double pk = 0.0, kp = 0.0, id1 = 0.0, id2 = 0.0;
    for (int m = 0; m < th.mode_count(); ++m) {
      const auto& o = th.ops[m];
      pk = std::max(pk, relative_poly_residual(o.P * o.K, o.P.norm() * o.K.norm()));
      kp = std::max(kp, relative_poly_residual(o.Kdag * o.P, o.P.norm() * o.Kdag.norm()));
      id1 = std::max(id1, relative_poly_residual(o.Kdag * o.Ptilde - o.Q * o.Kdag, o.Kdag.norm() * o.Ptilde.norm()));
      id2 = std::max(id2, relative_poly_residual(o.Ptilde * o.K - o.T * o.R, o.Ptilde.norm() * o.K.norm()));
    }
    rep.add("P_compose_K_per_mode", pk, 1e-12);
    rep.add("Kdag_compose_P_per_mode", kp, 1e-12);
    rep.add("Kdag_Ptilde_eq_Q_Kdag_per_mode", id1, 1e-12);
    rep.add("Ptilde_K_eq_T_R_per_mode", id2, 1e-12);
    rep.add("K_adjoint_pairing", kadj, 1e-10);
    rep.add("P_K_on_sections", pk_app, 1e-10);
    rep.add("Kdag_Ptilde_eq_Q_Kdag_on_sections", id1_app, 1e-10);
    rep.add("Ptilde_K_eq_T_R_on_sections", id2_app, 1e-10);
  }
  rep.add("statistics_matches_form_symmetry",
          (th.statistics == Statistics::bosonic) == (th.V.symmetry == Symmetry::symmetric) ? 0.0 : 1.0, 0.0);
  return rep;
}

}  // namespace gaugelab
