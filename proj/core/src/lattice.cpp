#include "hym/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <random>

#include "hym/linalg.hpp"

namespace hym {

namespace {
const cd I(0, 1);
}

Lattice::Lattice(const TorusGrid& g, const BundleSpec& e)
    : grid_(g), bundle_(e), m0_(Metric::make(g)), cache_(g.N) {
  grid_.validate();
  bundle_.validate();
}

const FactorOps& Lattice::fac(int k, int i, int j) const {
  Flux d = bundle_.hom(i, j);
  return cache_.get(k == 0 ? d.m1 : d.m2);
}

const Mat& Lattice::opmat(Op op, const FactorOps& f) const {
  switch (op) {
    case Op::DbarF: return f.dbF;
    case Op::DF: return f.dF;
    case Op::DbarB: return f.dbB;
    case Op::DB: return f.dB;
    case Op::Dx: return f.Dx;
    case Op::Dy: return f.Dy;
  }
  return f.dbF;
}

EndField Lattice::apply(Op op, int k, const EndField& X) const {
  EndField Y(r(), n2());
  for (int i = 0; i < r(); ++i)
    for (int j = 0; j < r(); ++j) {
      const Mat& M = opmat(op, fac(k, i, j));
      if (k == 0) Y(i, j).noalias() = M * X(i, j);
      else Y(i, j).noalias() = X(i, j) * M.transpose();
    }
  return Y;
}

EndField Lattice::apply_adj(Op op, int k, const EndField& X) const {
  EndField Y(r(), n2());
  for (int i = 0; i < r(); ++i)
    for (int j = 0; j < r(); ++j) {
      const Mat& M = opmat(op, fac(k, i, j));
      if (k == 0) Y(i, j).noalias() = M.adjoint() * X(i, j);
      else Y(i, j).noalias() = X(i, j) * M.conjugate();
    }
  return Y;
}

Form Lattice::base_curvature() const {
  Form F = zero_form(1, 1);
  const int N = grid_.N;
  const double a = grid_.a();
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < r(); ++i) {
      const auto& f = cache_.get(k == 0 ? bundle_.flux[i].m1 : bundle_.flux[i].m2);
      Eigen::VectorXd F0(n2());
      for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) F0[x * N + y] = -f.plaquette_angle(x, y) / (2 * a * a);
      Mat& blk = F.c[3 * k](i, i);
      if (k == 0) blk = (F0 * Eigen::VectorXd::Ones(n2()).transpose()).cast<cd>();
      else blk = (Eigen::VectorXd::Ones(n2()) * F0.transpose()).cast<cd>();
    }
  return F;
}

Form Lattice::curvature(const Form& g) const {
  Form F = base_curvature();
  std::array<EndField, 2> gd{adj(g.c[0]), adj(g.c[1])};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      EndField& a = F.c[2 * j + k];
      a += apply(Op::DB, j, g.c[k]);
      a += apply(Op::DbarB, k, gd[j]);
      a += mul(g.c[k], gd[j]);
      a -= mul(gd[j], g.c[k]);
    }
  return F;
}

EndField Lattice::contract(const Form& alpha, const Metric& m) const {
  if (alpha.p != 1 || alpha.q != 1) throw ConfigError("contract: needs a (1,1)-form");
  EndField L(r(), n2());
  const Eigen::VectorXd i1 = m.t1.cwiseInverse(), i2 = m.t2.cwiseInverse();
  for (size_t b = 0; b < L.b.size(); ++b) {
    L.b[b] = -2.0 * I * (i1.asDiagonal() * alpha.c[0].b[b] + alpha.c[3].b[b] * i2.asDiagonal());
  }
  return L;
}

EndField Lattice::i_lambda_F(const Form& g, const Metric& m) const {
  EndField L = contract(curvature(g), m);
  L *= I;
  return L;
}

double Lattice::einstein_constant(const Metric& m) const {
  double s = 0;
  for (auto& f : bundle_.flux) s += f.m1 * m.T2 + f.m2 * m.T1;
  return 2 * M_PI * s / (r() * m.T1 * m.T2);
}

EndField Lattice::hym_defect(const Form& g, const Metric& m) const {
  EndField D = i_lambda_F(g, m);
  const double c = einstein_constant(m);
  for (int i = 0; i < r(); ++i) D(i, i).array() -= c;
  return D;
}

double Lattice::hym_residual(const Form& g, const Metric& m) const {
  return norm(hym_defect(g, m), m);
}

Form Lattice::integrability(const Form& g) const {
  Form c = dbar01(g);
  c.c[0] += comm(g.c[0], g.c[1]);
  return c;
}

Form Lattice::gauge_act(const EndField& f, const Form& g) const { return gauge_act(f, inverse(f), g); }

Form Lattice::gauge_act(const EndField& f, const EndField& fi, const Form& g) const {
  Form out = zero_form(0, 1);
  for (int k = 0; k < 2; ++k) {
    out.c[k] = mul(mul(f, g.c[k]), fi);
    out.c[k] += mul(f, apply(Op::DbarF, k, fi));
  }
  return out;
}

Form Lattice::dbar(const EndField& s) const {
  Form f = zero_form(0, 1);
  for (int k = 0; k < 2; ++k) f.c[k] = apply(Op::DbarF, k, s);
  return f;
}

Form Lattice::del(const EndField& s) const {
  Form f = zero_form(1, 0);
  for (int k = 0; k < 2; ++k) f.c[k] = apply(Op::DF, k, s);
  return f;
}

Form Lattice::dbar01(const Form& a) const {
  Form c = zero_form(0, 2);
  c.c[0] = apply(Op::DbarF, 0, a.c[1]) - apply(Op::DbarF, 1, a.c[0]);
  return c;
}

Form Lattice::dbar01_star(const Form& c) const {
  Form a = zero_form(0, 1);
  EndField t2 = apply_adj(Op::DbarF, 1, c.c[0]) + apply_adj(Op::DbarB, 1, c.c[0]);
  EndField t1 = apply_adj(Op::DbarF, 0, c.c[0]) + apply_adj(Op::DbarB, 0, c.c[0]);
  a.c[0] = cd(-0.5 * w(1)) * t2;
  a.c[1] = cd(0.5 * w(0)) * t1;
  return a;
}

EndField Lattice::dbar_star(const Form& a) const {
  EndField s = zero();
  for (int k = 0; k < 2; ++k) {
    EndField t = apply_adj(Op::DbarF, k, a.c[k]) + apply_adj(Op::DbarB, k, a.c[k]);
    s += cd(0.5 * w(k)) * t;
  }
  return s;
}

Form Lattice::wedge01(const Form& a, const Form& b) const {
  Form c = zero_form(0, 2);
  c.c[0] = mul(a.c[0], b.c[1]) - mul(a.c[1], b.c[0]);
  return c;
}

EndField Lattice::tensor_apply(const EndField& X,
                               const std::function<const Mat&(const FactorOps&)>& A, double wa,
                               const std::function<const Mat&(const FactorOps&)>& B,
                               double wb) const {
  EndField Y(r(), n2());
  for (int i = 0; i < r(); ++i)
    for (int j = 0; j < r(); ++j) {
      Y(i, j).noalias() = wa * (A(fac(0, i, j)) * X(i, j));
      Y(i, j).noalias() += wb * (X(i, j) * B(fac(1, i, j)).transpose());
    }
  return Y;
}

EndField Lattice::tensor_solve(const EndField& R,
                               const std::function<const Eig&(const FactorOps&)>& A, double wa,
                               const std::function<const Eig&(const FactorOps&)>& B, double wb,
                               double tol, const std::function<double(double)>& fn) const {
  EndField X(r(), n2());
  for (int i = 0; i < r(); ++i)
    for (int j = 0; j < r(); ++j) {
      const Eig& ea = A(fac(0, i, j));
      const Eig& eb = B(fac(1, i, j));
      Mat Y = ea.vec.adjoint() * R(i, j) * eb.vec.conjugate();
      for (int q = 0; q < Y.cols(); ++q)
        for (int p = 0; p < Y.rows(); ++p) {
          const double lam = wa * ea.val[p] + wb * eb.val[q];
          if (fn) Y(p, q) *= fn(lam);
          else Y(p, q) = std::abs(lam) > tol ? Y(p, q) / lam : cd(0);
        }
      X(i, j).noalias() = ea.vec * Y * eb.vec.transpose();
    }
  return X;
}

EndField Lattice::laplacian(LapKind kind, const EndField& s) const {
  switch (kind) {
    case LapKind::Nabla:
      return tensor_apply(s, [](const FactorOps& f) -> const Mat& { return f.Lap; }, w(0),
                          [](const FactorOps& f) -> const Mat& { return f.Lap; }, w(1));
    case LapKind::Dbar:
      return tensor_apply(s, [](const FactorOps& f) -> const Mat& { return f.Q; }, w(0),
                          [](const FactorOps& f) -> const Mat& { return f.Q; }, w(1));
    case LapKind::Del:
      return tensor_apply(s, [](const FactorOps& f) -> const Mat& { return f.P; }, w(0),
                          [](const FactorOps& f) -> const Mat& { return f.P; }, w(1));
  }
  return s;
}

namespace {
const Mat& gP(const FactorOps& f) { return f.P; }
const Mat& gQ(const FactorOps& f) { return f.Q; }
const Eig& eP(const FactorOps& f) { return f.eP; }
const Eig& eQ(const FactorOps& f) { return f.eQ; }
const Eig& eL(const FactorOps& f) { return f.eLap; }
}  // namespace

Form Lattice::laplacian01(const Form& a) const {
  Form o = zero_form(0, 1);
  o.c[0] = tensor_apply(a.c[0], gP, w(0), gQ, w(1));
  o.c[1] = tensor_apply(a.c[1], gQ, w(0), gP, w(1));
  return o;
}

Form Lattice::laplacian02(const Form& c) const {
  Form o = zero_form(0, 2);
  o.c[0] = tensor_apply(c.c[0], gP, w(0), gP, w(1));
  return o;
}

EndField Lattice::solve_sections(const EndField& rhs, double tol) const {
  return tensor_solve(rhs, eL, w(0), eL, w(1), tol);
}

Form Lattice::solve01(const Form& rhs, double tol) const {
  Form o = zero_form(0, 1);
  o.c[0] = tensor_solve(rhs.c[0], eP, w(0), eQ, w(1), tol);
  o.c[1] = tensor_solve(rhs.c[1], eQ, w(0), eP, w(1), tol);
  return o;
}

Form Lattice::solve02(const Form& rhs, double tol) const {
  Form o = zero_form(0, 2);
  o.c[0] = tensor_solve(rhs.c[0], eP, w(0), eP, w(1), tol);
  return o;
}

EndField Lattice::heat(const EndField& s, double tau) const {
  return tensor_solve(s, eL, w(0), eL, w(1), 0, [tau](double l) { return std::exp(-tau * l); });
}

namespace {
struct FamSel {
  const Mat& (*A)(const FactorOps&);
  const Mat& (*B)(const FactorOps&);
  const Eig& (*eA)(const FactorOps&);
  const Eig& (*eB)(const FactorOps&);
};
const Mat& gL(const FactorOps& f) { return f.Lap; }
FamSel select(Lattice::Family fam) {
  switch (fam) {
    case Lattice::Family::Sections: return {gL, gL, eL, eL};
    case Lattice::Family::Form01a: return {gP, gQ, eP, eQ};
    case Lattice::Family::Form01b: return {gQ, gP, eQ, eP};
    case Lattice::Family::Form02: return {gP, gP, eP, eP};
  }
  return {gL, gL, eL, eL};
}
}  // namespace

Mat Lattice::block_apply(Family fam, int i, int j, const Mat& X) const {
  auto s = select(fam);
  Mat Y = w(0) * (s.A(fac(0, i, j)) * X);
  Y.noalias() += w(1) * (X * s.B(fac(1, i, j)).transpose());
  return Y;
}

Mat Lattice::block_fn(Family fam, int i, int j, const Mat& X,
                      const std::function<double(double)>& fn) const {
  auto s = select(fam);
  const Eig& ea = s.eA(fac(0, i, j));
  const Eig& eb = s.eB(fac(1, i, j));
  Mat Y = ea.vec.adjoint() * X * eb.vec.conjugate();
  for (int q = 0; q < Y.cols(); ++q)
    for (int p = 0; p < Y.rows(); ++p) Y(p, q) *= fn(w(0) * ea.val[p] + w(1) * eb.val[q]);
  return ea.vec * Y * eb.vec.transpose();
}

RVecLike Lattice::block_spectrum(Family fam, int i, int j) const {
  auto s = select(fam);
  const Eig& ea = s.eA(fac(0, i, j));
  const Eig& eb = s.eB(fac(1, i, j));
  RVecLike v(ea.val.size() * eb.val.size());
  long k = 0;
  for (int p = 0; p < ea.val.size(); ++p)
    for (int q = 0; q < eb.val.size(); ++q) v[k++] = w(0) * ea.val[p] + w(1) * eb.val[q];
  std::sort(v.data(), v.data() + v.size());
  return v;
}

RMat Lattice::vol_weight(const Metric& m) const { return m.vol() * grid_.cell(); }

double Lattice::inner(const EndField& a, const EndField& b, const Metric& m) const {
  return hym::inner(a, b, vol_weight(m));
}

cd Lattice::cinner(const Form& a, const Form& b, const Metric& m) const {
  if (a.c.size() != b.c.size()) throw ConfigError("inner: bidegree mismatch");
  if (a.p + a.q == 0) return hym::cinner(a.c[0], b.c[0], vol_weight(m));
  cd s = 0;
  if (a.p + a.q == 1) {
    for (int k = 0; k < 2; ++k) s += hym::cinner(a.c[k], b.c[k], m.wvol(k) * grid_.cell());
    return s;
  }
  if (a.p == 1 && a.q == 1) {
    // |dz_j ^ dzb_k|^2 = w_j w_k
    auto wk = [&](int k) -> RMat {
      const Eigen::VectorXd one = Eigen::VectorXd::Ones(n2());
      if (k == 0) return 2.0 * m.t1.cwiseInverse() * one.transpose();
      return 2.0 * one * m.t2.cwiseInverse().transpose();
    };
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        RMat W = m.vol() * grid_.cell();
        W.array() *= wk(j).array() * wk(k).array();
        s += hym::cinner(a.c[2 * j + k], b.c[2 * j + k], W);
      }
    return s;
  }
  // (0,2): weight w1 w2
  RMat W = m.vol() * grid_.cell();
  W.array() *= (4.0 * m.t1.cwiseInverse() * m.t2.cwiseInverse().transpose()).array();
  return hym::cinner(a.c[0], b.c[0], W);
}

double Lattice::inner(const Form& a, const Form& b, const Metric& m) const {
  return cinner(a, b, m).real();
}

std::vector<EndField> Lattice::section_kernel(double tol) const {
  std::vector<EndField> out;
  const double s = 1.0 / std::sqrt(grid_.vol() * grid_.cell());
  for (int i = 0; i < r(); ++i)
    for (int j = 0; j < r(); ++j) {
      const Eig& ea = fac(0, i, j).eLap;
      const Eig& eb = fac(1, i, j).eLap;
      for (int p = 0; p < ea.val.size(); ++p)
        for (int q = 0; q < eb.val.size(); ++q)
          if (w(0) * ea.val[p] + w(1) * eb.val[q] < tol) {
            EndField e = zero();
            e(i, j) = s * ea.vec.col(p) * eb.vec.col(q).transpose();
            out.push_back(std::move(e));
          }
    }
  return out;
}

EndField Lattice::project_off(const std::vector<EndField>& onb, const EndField& x,
                              const RMat& W) const {
  EndField y = x;
  for (auto& e : onb) {
    cd c = hym::cinner(x, e, W) / hym::cinner(e, e, W);
    y -= c * e;
  }
  return y;
}

Lattice::GreenResult Lattice::green_solve(const EndField& rhs, double tol, int max_iter) const {
  GreenResult res;
  auto ker = section_kernel();
  const RMat W = vol_weight(m0_);
  EndField rp = project_off(ker, rhs, W);
  res.projected = std::sqrt(std::max(0.0, hym::inner(rhs, rhs, W) - hym::inner(rp, rp, W)));
  if (std::sqrt(hym::inner(rp, rp, W)) <= 1e-13 * std::sqrt(hym::inner(rhs, rhs, W))) {
    res.x = zero();
    return res;
  }
  EndField shape = zero();
  auto A = [&](const Vec& v) {
    unflatten(v, shape);
    return flatten(laplacian(LapKind::Nabla, shape));
  };
  auto M = [&](const Vec& v) {
    unflatten(v, shape);
    return flatten(solve_sections(shape));
  };
  // CG in the Euclidean product; W is a constant multiple of it at eps = 0
  auto cg = linalg::pcg(A, M, flatten(rp), Vec::Zero(rp.size()), tol, max_iter);
  res.x = zero();
  unflatten(cg.x, res.x);
  res.x = project_off(ker, res.x, W);
  res.residual = cg.rel_residual;
  res.iterations = cg.iterations;
  if (!cg.converged) throw SolverError("green_solve: no convergence", cg.rel_residual);
  return res;
}

EndField random_field(int r, int n2, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  EndField f(r, n2);
  for (auto& m : f.b)
    for (long k = 0; k < m.size(); ++k) m.data()[k] = cd(nd(rng), nd(rng));
  return f;
}

Form random_form(int p, int q, int r, int n2, unsigned long long seed) {
  Form f(p, q, r, n2);
  for (size_t k = 0; k < f.c.size(); ++k) f.c[k] = random_field(r, n2, seed * 7919 + k);
  return f;
}

KahlerReport Lattice::kahler_residuals(int samples, unsigned long long seed, double tau) const {
  KahlerReport rep;
  const Metric& m = m0_;
  const Form F0 = zero_form(0, 1);
  const EndField iLF = i_lambda_F(F0, m);
  for (int n = 0; n < samples; ++n) {
    // first identity on (0,1)-forms
    Form a = random_form(0, 1, r(), n2(), seed + 101 * n);
    for (auto& c : a.c) c = heat(c, tau);
    const double na = norm(a, m);
    if (na > 0) {
      EndField lhs = zero();
      for (int k = 0; k < 2; ++k) {
        EndField d = apply(Op::DF, k, a.c[k]) + apply(Op::DB, k, a.c[k]);
        lhs += cd(0, -2.0 / (k == 0 ? grid_.t1 : grid_.t2) * 0.5) * d;
      }
      EndField rhs = dbar_star(a);
      rhs *= I;
      rep.first = std::max(rep.first, norm(lhs - rhs, m) / na);
    }
    EndField s = heat(random_field(r(), n2(), seed + 101 * n + 57), tau);
    const double ns = norm(s, m);
    if (ns == 0) continue;
    // second: i Lambda dbar d s paired across the two copies
    EndField ild = zero();
    for (int k = 0; k < 2; ++k) {
      EndField t = apply(Op::DbarF, k, apply(Op::DB, k, s)) + apply(Op::DbarB, k, apply(Op::DF, k, s));
      ild += cd(-w(k) * 0.5) * t;
    }
    rep.second = std::max(rep.second, norm(laplacian(LapKind::Del, s) - ild, m) / ns);
    // third
    EndField diff = laplacian(LapKind::Del, s) - laplacian(LapKind::Dbar, s);
    rep.third = std::max(rep.third, norm(diff - comm(iLF, s), m) / ns);
  }
  return rep;
}

void write_snapshot(const std::string& path, const Form& f, int N) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes little-endian host");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path);
  const std::int64_t n = N, r = f.c.empty() ? 0 : f.c[0].r;
  const std::int32_t p = f.p, q = f.q;
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(&r), 8);
  os.write(reinterpret_cast<const char*>(&p), 4);
  os.write(reinterpret_cast<const char*>(&q), 4);
  const int n2 = N * N;
  for (auto& c : f.c)
    for (int p1 = 0; p1 < n2; ++p1)
      for (int p2 = 0; p2 < n2; ++p2)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j) {
            const cd v = c(i, j)(p1, p2);
            const double re = v.real(), im = v.imag();
            os.write(reinterpret_cast<const char*>(&re), 8);
            os.write(reinterpret_cast<const char*>(&im), 8);
          }
}

Form read_snapshot(const std::string& path, int* Nout) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::int64_t n = 0, r = 0;
  std::int32_t p = 0, q = 0;
  is.read(reinterpret_cast<char*>(&n), 8);
  is.read(reinterpret_cast<char*>(&r), 8);
  is.read(reinterpret_cast<char*>(&p), 4);
  is.read(reinterpret_cast<char*>(&q), 4);
  if (!is || n < 1 || r < 1 || p < 0 || q < 0 || p + q > 2) throw ConfigError("bad snapshot header");
  const int n2 = int(n * n);
  Form f(p, q, int(r), n2);
  for (auto& c : f.c)
    for (int p1 = 0; p1 < n2; ++p1)
      for (int p2 = 0; p2 < n2; ++p2)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j) {
            double re, im;
            is.read(reinterpret_cast<char*>(&re), 8);
            is.read(reinterpret_cast<char*>(&im), 8);
            c(i, j)(p1, p2) = cd(re, im);
          }
  if (!is) throw ConfigError("truncated snapshot");
  if (Nout) *Nout = int(n);
  return f;
}

}  // namespace hym
