#include "hym/slice.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hym/linalg.hpp"

namespace hym {

namespace {

const cd I(0, 1);

Mat random_block(long n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat X(n, k);
  for (long i = 0; i < X.size(); ++i) X.data()[i] = cd(nd(rng), nd(rng));
  return X;
}

struct BlockEig {
  RVec val;
  Mat vec;
};

// smallest eigenpairs of one Hom-block Laplacian, growing the block until
// an eigenvalue above tau shows up
BlockEig block_eigs(const Lattice& L, Lattice::Family fam, int i, int j, double tau,
                    std::mt19937_64& rng) {
  const int n2 = L.n2();
  const long n = long(n2) * n2;
  auto A = [&](const Vec& v) {
    Mat X = Eigen::Map<const Mat>(v.data(), n2, n2);
    Mat Y = L.block_apply(fam, i, j, X);
    return Vec(Eigen::Map<Vec>(Y.data(), n));
  };
  const double shift = std::max(tau, 1e-3);
  auto T = [&](const Vec& v) {
    Mat X = Eigen::Map<const Mat>(v.data(), n2, n2);
    Mat Y = L.block_fn(fam, i, j, X, [shift](double l) { return 1.0 / (l + shift); });
    return Vec(Eigen::Map<Vec>(Y.data(), n));
  };
  for (int k = 6; k <= 64; k *= 2) {
    auto res = linalg::lobpcg(A, T, random_block(n, k, rng), 1e-9, 400);
    if (!res.converged) throw KernelError("eigen-solve did not converge", res.max_residual);
    if (res.values[res.values.size() - 1] > tau) return {res.values, res.vectors};
  }
  throw KernelError("kernel larger than the eigen block", 0);
}

}  // namespace

HarmonicBasis harmonic_basis(const Lattice& L, double tau, unsigned long long seed) {
  HarmonicBasis H;
  H.threshold = tau;
  H.gap = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const int r = L.r(), n2 = L.n2();
  const double cell = L.grid().cell() * L.grid().vol();
  std::vector<double> ev;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int c = 0; c < 2; ++c) {
        auto fam = c == 0 ? Lattice::Family::Form01a : Lattice::Family::Form01b;
        auto be = block_eigs(L, fam, i, j, tau, rng);
        for (int q = 0; q < be.val.size(); ++q) {
          if (be.val[q] > tau) {
            H.gap = std::min(H.gap, be.val[q]);
            continue;
          }
          Form f = L.zero_form(0, 1);
          f.c[c](i, j) = Eigen::Map<const Mat>(be.vec.col(q).data(), n2, n2) / std::sqrt(L.w(c) * cell);
          H.v.push_back(std::move(f));
          H.tag.push_back({i, j, c});
          ev.push_back(be.val[q]);
        }
      }
  H.eigenvalues = Eigen::Map<RVec>(ev.data(), long(ev.size()));
  if (H.gap < 10 * tau)
    throw KernelError("harmonic space: eigen-gap below 10x threshold", H.gap);
  return H;
}

AutAlgebra aut_algebra(const Lattice& L, const HarmonicBasis& V, double tau, unsigned long long seed) {
  AutAlgebra K;
  K.threshold = tau;
  K.gap = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const int r = L.r(), n2 = L.n2();
  const Metric& m0 = L.metric0();
  const RMat W = L.vol_weight(m0);
  const double unit = 1.0 / std::sqrt(L.grid().cell() * L.grid().vol());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      auto be = block_eigs(L, Lattice::Family::Sections, i, j, tau, rng);
      for (int q = 0; q < be.val.size(); ++q) {
        if (be.val[q] > tau) {
          K.gap = std::min(K.gap, be.val[q]);
          continue;
        }
        EndField e = L.zero();
        e(i, j) = Eigen::Map<const Mat>(be.vec.col(q).data(), n2, n2) * unit;
        K.kernel.push_back(std::move(e));
      }
    }
  if (K.gap < 10 * tau) throw KernelError("automorphisms: eigen-gap below 10x threshold", K.gap);

  // anti-Hermitian, trace-free real span of the kernel, as constant matrices
  std::vector<Mat> cand;
  for (auto& e : K.kernel) {
    Mat c = Mat::Zero(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) c(a, b) = e(a, b).mean();
    // parallel sections of the flat blocks are constants
    K.parallel_residual = std::max(K.parallel_residual, (e - constant(c, n2)).max_abs() / unit);
    cand.push_back(0.5 * (c - c.adjoint()));
    cand.push_back(0.5 * I * (c + c.adjoint()));
  }
  const double vol = L.grid().vol();
  auto rinner = [&](const Mat& A, const Mat& B) { return (A * B.adjoint()).trace().real() * vol; };
  const Mat iId = I * Mat::Identity(r, r);
  for (auto& c : cand) {
    Mat x = c - (rinner(c, iId) / rinner(iId, iId)) * iId;
    for (auto& k : K.k) x -= rinner(x, k) * k;
    for (auto& k : K.k) x -= rinner(x, k) * k;
    const double n = std::sqrt(std::max(0.0, rinner(x, x)));
    if (n < 1e-6 * unit) continue;
    x /= n;
    // sign: first sizeable entry has positive imaginary (else real) part
    for (long t = 0; t < x.size(); ++t) {
      const cd z = x(t / r, t % r);
      if (std::abs(z) < 1e-9) continue;
      if (z.imag() < -1e-12 || (std::abs(z.imag()) <= 1e-12 && z.real() < 0)) x = -x;
      break;
    }
    K.k.push_back(x);
  }
  for (auto& k : K.k) {
    EndField f = constant(k, n2);
    K.parallel_residual =
        std::max(K.parallel_residual, std::sqrt(inner(L.laplacian(LapKind::Nabla, f), L.laplacian(LapKind::Nabla, f), W)));
    K.kfield.push_back(std::move(f));
  }
  for (auto& kf : K.kfield) {
    Mat A(V.dim(), V.dim());
    for (int n = 0; n < V.dim(); ++n) {
      Form t = L.zero_form(0, 1);
      for (int c = 0; c < 2; ++c) t.c[c] = comm(kf, V.v[n].c[c]);
      for (int mm = 0; mm < V.dim(); ++mm) A(mm, n) = L.cinner(t, V.v[mm], m0);
    }
    K.action.push_back(A);
  }
  return K;
}

Slice::Slice(const Lattice& L, double tau_V, double tau_K, SliceParams p) : L_(L), p_(p) {
  V_ = harmonic_basis(L, tau_V);
  K_ = aut_algebra(L, V_, tau_K);
  init();
}

Slice::Slice(const Lattice& L, HarmonicBasis V, AutAlgebra K, SliceParams p)
    : L_(L), V_(std::move(V)), K_(std::move(K)), p_(p) {
  init();
}

void Slice::init() {
  int m1 = 0, m2 = 0;
  for (auto& f : L_.bundle().flux) {
    m1 = std::max(m1, std::abs(f.m1));
    m2 = std::max(m2, std::abs(f.m2));
  }
  kappa_ = std::max(1.0, M_PI * (L_.w(0) * m1 + L_.w(1) * m2));
}

Form Slice::expand(const CVec& b) const {
  Form f = L_.zero_form(0, 1);
  for (int n = 0; n < V_.dim(); ++n) {
    if (b[n] == cd(0)) continue;
    const auto& t = V_.tag[n];
    f.c[t[2]](t[0], t[1]) += b[n] * V_.v[n].c[t[2]](t[0], t[1]);
  }
  return f;
}

CVec Slice::coords(const Form& a) const {
  CVec c(V_.dim());
  for (int n = 0; n < V_.dim(); ++n) c[n] = L_.cinner(a, V_.v[n], L_.metric0());
  return c;
}

Form Slice::project_V(const Form& a) const { return expand(coords(a)); }

Form Slice::kuranishi_phi(const CVec& b, double* increment, int* iters) const {
  if (b.size() != V_.dim()) throw ConfigError("slice coordinates have the wrong dimension");
  if (b.norm() > p_.ball_radius) throw RadiusError("b outside the ball B; shrink B", b.norm());
  Form vb = expand(b);
  Form a = vb;
  const double scale = std::max(L_.norm(vb, L_.metric0()), 1e-300);
  double inc = 0;
  int it = 0;
  for (; it < p_.kuranishi_max; ++it) {
    Form q = L_.wedge01(a, a);
    if (q.max_abs() == 0) break;
    Form corr = L_.dbar01_star(L_.solve02(q));
    corr -= project_V(corr);
    Form next = vb - corr;
    inc = L_.norm(next - a, L_.metric0()) / scale;
    a = std::move(next);
    if (!std::isfinite(inc) || inc > 1e6) throw RadiusError("Kuranishi iteration diverged; shrink B", inc);
    if (inc <= p_.kuranishi_tol) break;
  }
  if (it == p_.kuranishi_max) throw RadiusError("Kuranishi iteration did not settle; shrink B", inc);
  if (increment) *increment = inc;
  if (iters) *iters = it;
  return a;
}

Metric Slice::metric(const Perturbation& e) const {
  check_eps(e);
  return Metric::make(L_.grid(), e);
}

void Slice::check_eps(const Perturbation& e) const {
  const double lim = p_.eps_radius * std::min(L_.grid().t1, L_.grid().t2);
  if (e.c0_norm() > lim * (1 + 1e-12))
    throw NeighborhoodError("perturbation outside the configured neighbourhood U", e.c0_norm());
}

EndField Slice::project_kernel_off(const EndField& x, const RMat& W) const {
  const int n = int(K_.kernel.size());
  if (n == 0) return x;
  Mat G(n, n);
  CVec rhs(n);
  for (int a = 0; a < n; ++a) {
    rhs[a] = cinner(x, K_.kernel[a], W);
    for (int b = 0; b < n; ++b) G(a, b) = cinner(K_.kernel[b], K_.kernel[a], W);
  }
  CVec c = G.ldlt().solve(rhs);
  EndField y = x;
  for (int b = 0; b < n; ++b) y -= c[b] * K_.kernel[b];
  return y;
}

namespace {
double dexp(double x) { return std::exp(x); }
double dexpm(double x) { return std::exp(-x); }

// Hermitian fields as real vectors (Re, Im of every entry)
Vec to_real(const EndField& H) {
  Vec f = flatten(H);
  Vec v(2 * f.size());
  v.head(f.size()) = f.real().cast<cd>();
  v.tail(f.size()) = f.imag().cast<cd>();
  return v;
}
void from_real(const Vec& v, EndField& H) {
  const long n = v.size() / 2;
  Vec f = v.head(n).real().cast<cd>() + I * v.tail(n).real().cast<cd>();
  unflatten(f, H);
}
}  // namespace

EndField Slice::psi(const Perturbation& e, const Form& gamma_b, const EndField& s) const {
  Metric m = metric(e);
  EndField f = herm_apply(s, dexp), fi = herm_apply(s, dexpm);
  Form g = L_.gauge_act(f, fi, gamma_b);
  return project_kernel_off(L_.hym_defect(g, m), L_.vol_weight(m));
}

RVec Slice::moment_coords(const EndField& X, const Metric& m, double* off) const {
  const int d = K_.dim();
  RVec nu = RVec::Zero(d);
  const RMat W = L_.vol_weight(m);
  EndField mX = X;
  mX *= -I;
  if (d > 0) {
    RMat G(d, d);
    RVec rhs(d);
    for (int a = 0; a < d; ++a) {
      rhs[a] = inner(mX, K_.kfield[a], W);
      for (int b = 0; b < d; ++b) G(a, b) = inner(K_.kfield[a], K_.kfield[b], W);
    }
    nu = G.ldlt().solve(rhs);
  }
  if (off) {
    EndField rest = mX;
    for (int a = 0; a < d; ++a) rest -= cd(nu[a]) * K_.kfield[a];
    *off = std::sqrt(inner(rest, rest, W));
  }
  return nu;
}

Mat Slice::k_matrix(const RVec& nu) const {
  Mat M = Mat::Zero(L_.r(), L_.r());
  for (int j = 0; j < K_.dim(); ++j) M += nu[j] * K_.k[j];
  return M;
}

PerturbedPoint Slice::sigma_solve(const Perturbation& e, const CVec& b, const EndField* warm) const {
  PerturbedPoint P;
  P.b = b;
  P.eps = e;
  Metric m = metric(e);
  const RMat W = L_.vol_weight(m);
  const RMat W0 = L_.vol_weight(L_.metric0());
  P.gamma_b = kuranishi_phi(b);
  EndField s = warm ? *warm : L_.zero();
  s = herm_part(project_kernel_off(s, W0));
  const double target = p_.tol_sigma * kappa_;
  auto resid = [&](const EndField& x) { return psi(e, P.gamma_b, x); };
  EndField R = resid(s);
  double res = std::sqrt(inner(R, R, W));
  double prev = res;
  int slow = 0;
  int it = 0;
  for (; it < p_.max_chord && res > target; ++it) {
    s -= L_.solve_sections(R);
    s = herm_part(project_kernel_off(s, W0));
    R = resid(s);
    res = std::sqrt(inner(R, R, W));
    if (!std::isfinite(res)) throw NeighborhoodError("sigma iteration blew up; shrink U or B", res);
    slow = res > 0.5 * prev ? slow + 1 : 0;
    prev = res;
    if (slow >= 2) break;
  }
  if (res > target) {
    // Newton with finite-difference Jacobian, Delta_0^-1 preconditioned GMRES
    P.newton = true;
    EndField shape = L_.zero();
    for (int nt = 0; nt < p_.max_newton && res > target; ++nt, ++it) {
      const double h = 1e-7;
      auto J = [&](const Vec& v) {
        EndField dv = L_.zero();
        from_real(v, dv);
        dv = herm_part(project_kernel_off(dv, W0));
        const double nv = std::sqrt(inner(dv, dv, W0));
        if (nv == 0) return Vec(Vec::Zero(v.size()));
        const double hh = h / nv;
        EndField sp = s + cd(hh) * dv, sm = s - cd(hh) * dv;
        EndField d = resid(sp) - resid(sm);
        d *= 1.0 / (2 * hh);
        return to_real(herm_part(d));
      };
      auto M = [&](const Vec& v) {
        from_real(v, shape);
        return to_real(herm_part(L_.solve_sections(shape)));
      };
      auto g = linalg::gmres(J, M, -to_real(R), Vec::Zero(2 * s.size()), 1e-3, 30, 120);
      EndField ds = L_.zero();
      from_real(g.x, ds);
      ds = herm_part(project_kernel_off(ds, W0));
      double step = 1;
      bool ok = false;
      for (int ls = 0; ls < 8; ++ls, step *= 0.5) {
        EndField trial = s + cd(step) * ds;
        EndField Rt = resid(trial);
        const double rt = std::sqrt(inner(Rt, Rt, W));
        if (rt < res) {
          s = trial;
          R = Rt;
          res = rt;
          ok = true;
          break;
        }
      }
      if (!ok) break;
    }
  }
  if (!(res <= target)) throw NeighborhoodError("sigma solve did not converge; shrink U or B", res);
  P.s = s;
  P.residual = res;
  P.iterations = it;
  P.gamma = L_.gauge_act(herm_apply(s, dexp), herm_apply(s, dexpm), P.gamma_b);
  EndField X = L_.hym_defect(P.gamma, m);
  P.nu = moment_coords(X, m, &P.off_k);
  return P;
}

double Slice::omega_D(const Form& a, const Form& b, const Metric& m) const {
  return -2.0 * L_.cinner(a, b, m).imag();
}

Form Slice::dphi_tilde(const Perturbation& e, const CVec& b, const CVec& v, double h) const {
  if (h <= 0) h = 1e-4 * p_.ball_radius;
  if (h < 1e-12) throw SolverError("finite-difference step underflow", h);
  auto D = [&](double hh) {
    auto p = sigma_solve(e, b + hh * v);
    auto q = sigma_solve(e, b - hh * v);
    Form d = p.gamma - q.gamma;
    d *= 1.0 / (2 * hh);
    return d;
  };
  Form d1 = D(h), d2 = D(h / 2);
  Form r = 4.0 * d2 - d1;
  r *= 1.0 / 3.0;
  return r;
}

double Slice::omega(const Perturbation& e, const CVec& b, const CVec& v, const CVec& w, double h) const {
  Metric m = metric(e);
  return omega_D(dphi_tilde(e, b, v, h), dphi_tilde(e, b, w, h), m);
}

CVec Slice::act(const Mat& g, const CVec& b) const {
  const Mat gi = g.inverse();
  const EndField G = constant(g, L_.n2()), Gi = constant(gi, L_.n2());
  Form vb = expand(b);
  Form t = L_.zero_form(0, 1);
  for (int c = 0; c < 2; ++c) t.c[c] = mul(mul(G, vb.c[c]), Gi);
  return coords(t);
}

CVec Slice::infinitesimal(const RVec& a, const CVec& b) const {
  CVec out = CVec::Zero(b.size());
  for (int j = 0; j < K_.dim(); ++j) out += a[j] * (K_.action[j] * b);
  return out;
}

}  // namespace hym
