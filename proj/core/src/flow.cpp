#include "hym/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace hym::flow {

namespace {

const cd I(0, 1);

double dexp(double x) { return std::exp(x); }

// Dormand-Prince 5(4)
constexpr double C2 = 1. / 5, C3 = 3. / 10, C4 = 4. / 5, C5 = 8. / 9;
constexpr double A21 = 1. / 5;
constexpr double A31 = 3. / 40, A32 = 9. / 40;
constexpr double A41 = 44. / 45, A42 = -56. / 15, A43 = 32. / 9;
constexpr double A51 = 19372. / 6561, A52 = -25360. / 2187, A53 = 64448. / 6561, A54 = -212. / 729;
constexpr double A61 = 9017. / 3168, A62 = -355. / 33, A63 = 46732. / 5247, A64 = 49. / 176,
                 A65 = -5103. / 18656;
constexpr double B1 = 35. / 384, B3 = 500. / 1113, B4 = 125. / 192, B5 = -2187. / 6784, B6 = 11. / 84;
constexpr double E1 = B1 - 5179. / 57600, E3 = B3 - 7571. / 16695, E4 = B4 - 393. / 640,
                 E5 = B5 + 92097. / 339200, E6 = B6 - 187. / 2100, E7 = -1. / 40;

struct Eval {
  PerturbedPoint p;
  CVec dy;
  double nu = 0;
};

double cond(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g);
  const auto& s = svd.singularValues();
  return s[0] / s[s.size() - 1];
}

Form block_mask(const Form& g, const std::function<bool(int, int)>& keep) {
  Form out = g;
  for (auto& c : out.c)
    for (int i = 0; i < c.r; ++i)
      for (int j = 0; j < c.r; ++j)
        if (!keep(i, j)) c(i, j).setZero();
  return out;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::Destabilized: return "Destabilized";
    case Outcome::BudgetExceeded: return "BudgetExceeded";
  }
  return "?";
}

double nu_norm(const Slice& S, const PerturbedPoint& p) {
  if (p.nu.size() == 0) return 0;
  const Lattice& L = S.lattice();
  return L.norm(constant(S.k_matrix(p.nu), L.n2()), S.metric(p.eps));
}

CVec vector_field(const Slice& S, const PerturbedPoint& p) {
  return -I * S.infinitesimal(p.nu, p.b);
}

CVec vector_field(const Slice& S, const Perturbation& e, const CVec& b) {
  return vector_field(S, S.sigma_solve(e, b));
}

double donaldson_increment(const Lattice& L, const EndField& f, const EndField& fdot, const EndField& X,
                           const Metric& m) {
  EndField v = mul(fdot, inverse(f));
  v += adj(v);
  return inner(v, X, L.vol_weight(m));
}

double donaldson_path(const Lattice& L, const Form& gamma, const EndField& A, const EndField& B,
                      const Metric& m, int n) {
  if (n < 2 || n % 2) throw ConfigError("donaldson_path: need an even number of intervals");
  auto f_at = [&](double u) {
    EndField s = A;
    s *= 1 - u;
    EndField t = B;
    t *= u;
    s += t;
    return herm_apply(s, dexp);
  };
  const double du = 1e-5;
  double sum = 0;
  for (int q = 0; q <= n; ++q) {
    const double u = double(q) / n;
    EndField f = f_at(u);
    EndField fd = f_at(u + du) - f_at(u - du);
    fd *= 1 / (2 * du);
    EndField X = L.hym_defect(L.gauge_act(f, inverse(f), gamma), m);
    const double w = (q == 0 || q == n) ? 1 : (q % 2 ? 4 : 2);
    sum += w * donaldson_increment(L, f, fd, X, m);
  }
  return sum / (3.0 * n);
}

FlowReport integrate(const Slice& S, const Perturbation& e, const CVec& b0, const FlowParams& fp) {
  const Lattice& L = S.lattice();
  const int d = S.V().dim(), r = L.r(), n2 = L.n2();
  const Metric m = S.metric(e);
  FlowReport rep;
  rep.eps = e;

  EndField warm = L.zero();
  auto eval = [&](const CVec& y) {
    Eval ev;
    ev.p = S.sigma_solve(e, y.head(d), &warm);
    ev.nu = nu_norm(S, ev.p);
    const Mat g = Eigen::Map<const Mat>(y.data() + d, r, r);
    const Mat gd = g * (I * S.k_matrix(ev.p.nu));
    ev.dy.resize(d + r * r);
    ev.dy.head(d) = vector_field(S, ev.p);
    ev.dy.tail(r * r) = Eigen::Map<const Vec>(gd.data(), r * r);
    return ev;
  };

  // starting-point rule: halve b0 until |nu(b0)| <= 2 |nu(0)|
  const double nu0 = nu_norm(S, S.sigma_solve(e, CVec::Zero(d)));
  CVec b = b0;
  Eval cur;
  CVec y(d + r * r);
  for (;; ++rep.halvings) {
    y.head(d) = b;
    y.tail(r * r) = Eigen::Map<const Vec>(Mat::Identity(r, r).eval().data(), r * r);
    warm = L.zero();
    cur = eval(y);
    if (cur.nu <= 2 * nu0 + fp.tol_nu || rep.halvings >= fp.max_halvings) break;
    b *= 0.5;
  }
  rep.b_start = b;
  warm = cur.p.s;
  const double phi_b0 = std::max(L.norm(cur.p.gamma_b, L.metric0()), 1e-300);

  auto herm_exp = [&](const EndField& s) { return herm_apply(s, dexp); };
  auto dphi_terms = [&](const Eval& ev, const Mat& g, const EndField& Edot) {
    // f = e^s g^-1, f' f^-1 = E' E^-1 - E (i nu) E^-1
    const EndField E = herm_exp(ev.p.s), Ei = herm_apply(ev.p.s, [](double x) { return std::exp(-x); });
    EndField v = mul(Edot, Ei) - mul(mul(E, constant(I * S.k_matrix(ev.p.nu), n2)), Ei);
    v += adj(v);
    (void)g;
    return inner(v, L.hym_defect(ev.p.gamma, m), L.vol_weight(m));
  };

  FlowState st;
  st.b = b;
  st.g = Mat::Identity(r, r);
  st.nu_norm = cur.nu;
  auto row_of = [&](const FlowState& s, const Eval& ev, double h, double orbit) {
    TrajRow row;
    row.t = s.t;
    row.nu_norm = ev.nu;
    row.phi = s.phi;
    row.b_norm = s.b.norm();
    row.step = h;
    row.hym_residual = L.hym_residual(ev.p.gamma, m);
    row.orbit_err = orbit;
    return row;
  };
  rep.rows.push_back(row_of(st, cur, 0, 0));
  rep.max_s_norm = L.norm(cur.p.s, m);

  auto finish = [&](Outcome o, const Eval& ev) {
    rep.outcome = o;
    rep.final = st;
    rep.point = ev.p;
    rep.cond_g = cond(st.g);
    int good = 0, tot = 0;
    for (size_t i = 1; i < rep.rows.size(); ++i) {
      if (rep.rows[i].dphi_ref == 0) continue;
      ++tot;
      const double q = rep.rows[i].dphi / rep.rows[i].dphi_ref;
      good += q >= 0.9 && q <= 1.1;
    }
    rep.phi_ratio_fraction = tot ? double(good) / tot : 1.0;
    if (o == Outcome::Destabilized) rep.destab = destabilizer_extract(S, rep);
    return rep;
  };

  auto converged = [&](const Eval& ev) {
    return ev.nu <= fp.tol_nu && L.hym_residual(ev.p.gamma, m) <= fp.tol_hym;
  };
  if (converged(cur)) return finish(Outcome::Converged, cur);

  double h = fp.h0;
  int steps = 0;
  while (true) {
    if (steps >= fp.max_steps || st.t >= fp.t_max) {
      rep.diagnostics = "budget exhausted at t=" + std::to_string(st.t) + ", |nu|=" + std::to_string(cur.nu);
      return finish(Outcome::BudgetExceeded, cur);
    }
    if (h < 1e-10) throw SolverError("flow step size underflow", h);
    const CVec& k1 = cur.dy;
    std::array<CVec, 7> k;
    k[0] = k1;
    Eval last;
    bool stage_fail = false;
    try {
      k[1] = eval(y + h * A21 * k[0]).dy;
      k[2] = eval(y + h * (A31 * k[0] + A32 * k[1])).dy;
      k[3] = eval(y + h * (A41 * k[0] + A42 * k[1] + A43 * k[2])).dy;
      k[4] = eval(y + h * (A51 * k[0] + A52 * k[1] + A53 * k[2] + A54 * k[3])).dy;
      k[5] = eval(y + h * (A61 * k[0] + A62 * k[1] + A63 * k[2] + A64 * k[3] + A65 * k[4])).dy;
    } catch (const RadiusError&) {
      stage_fail = true;
    } catch (const NeighborhoodError&) {
      stage_fail = true;
    }
    if (stage_fail) {
      warm = cur.p.s;
      h *= 0.25;
      ++rep.rejected;
      continue;
    }
    const CVec ynew = y + h * (B1 * k[0] + B3 * k[2] + B4 * k[3] + B5 * k[4] + B6 * k[5]);
    if (ynew.head(d).norm() > S.params().ball_radius) {
      BallExitError err("flow left the ball B", ynew.head(d).norm());
      for (auto& row : rep.rows) {
        err.t.push_back(row.t);
        err.b_norm.push_back(row.b_norm);
      }
      throw err;
    }
    last = eval(ynew);
    k[6] = last.dy;
    const CVec errv = h * (E1 * k[0] + E3 * k[2] + E4 * k[3] + E5 * k[4] + E6 * k[5] + E7 * k[6]);
    double en = 0;
    for (long i = 0; i < errv.size(); ++i)
      en = std::max(en, std::abs(errv[i]) / (fp.rtol * (1 + std::abs(y[i]))));
    const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-12), -0.2), 0.2, 5.0);
    if (en > 1) {
      warm = cur.p.s;
      h *= std::min(fac, 0.9);
      ++rep.rejected;
      continue;
    }
    if (last.nu > cur.nu + fp.mono_slack) {
      warm = cur.p.s;
      h *= 0.5;
      ++rep.rejected;
      ++rep.rejected_monotone;
      continue;
    }
    // accept
    rep.max_nu_increase = std::max(rep.max_nu_increase, last.nu - cur.nu);
    const Mat gnew = Eigen::Map<const Mat>(ynew.data() + d, r, r);
    EndField Edot = herm_exp(last.p.s) - herm_exp(cur.p.s);
    Edot *= 1 / h;
    const double dphi = 0.5 * h * (dphi_terms(cur, st.g, Edot) + dphi_terms(last, gnew, Edot));
    const double dref = -h * (cur.nu * cur.nu + last.nu * last.nu);
    st.t += h;
    st.b = ynew.head(d);
    st.g = gnew;
    st.phi += dphi;
    st.nu_norm = last.nu;
    const double orbit = (S.act(st.g.inverse(), rep.b_start) - st.b).norm();
    rep.max_orbit_err = std::max(rep.max_orbit_err, orbit);
    TrajRow row = row_of(st, last, h, orbit);
    row.dphi = dphi;
    row.dphi_ref = dref;
    rep.rows.push_back(row);
    rep.max_s_norm = std::max(rep.max_s_norm, L.norm(last.p.s, m));
    rep.min_phi = std::min(rep.min_phi, st.phi);
    y = ynew;
    cur = std::move(last);
    warm = cur.p.s;
    ++steps;
    h = std::min(h * fac, fp.h_max);

    if (converged(cur)) return finish(Outcome::Converged, cur);
    const double phi_now = L.norm(cur.p.gamma_b, L.metric0());
    if ((phi_now < fp.destab_ratio * phi_b0 && cur.nu > fp.tol_nu) || cond(st.g) > fp.cond_max)
      return finish(Outcome::Destabilized, cur);
  }
}

Destabilizer destabilizer_extract(const Slice& S, const FlowReport& rep) {
  const Lattice& L = S.lattice();
  const int r = L.r();
  if (rep.outcome == Outcome::Converged)
    throw InconclusiveDestabilizer("no destabilizer on a converged trajectory", rep.final.nu_norm);
  if (rep.rows.size() < 3)
    throw InconclusiveDestabilizer("trajectory too short for a destabilizer", 0);
  // log-velocity of g is i nu; e^{t xi} . b -> 0 along the flow for xi = -i nu
  Mat xi = -I * S.k_matrix(rep.point.nu);
  xi = 0.5 * (xi + xi.adjoint()).eval();
  xi -= (xi.trace() / double(r)) * Mat::Identity(r, r);
  const double n = xi.norm();
  if (!(n > 1e-12)) throw InconclusiveDestabilizer("log-velocity of g vanishes", n);
  xi /= n;

  Destabilizer D;
  D.xi = xi;
  Eigen::SelfAdjointEigenSolver<Mat> es(xi);
  const RVec ev = es.eigenvalues();
  D.basis = es.eigenvectors();
  std::vector<double> lam;
  std::vector<std::vector<int>> cols;
  for (int i = 0; i < r; ++i) {
    if (lam.empty() || ev[i] - lam.back() > 1e-6) {
      lam.push_back(ev[i]);
      cols.push_back({});
    }
    cols.back().push_back(i);
  }
  D.lambda = Eigen::Map<RVec>(lam.data(), long(lam.size()));
  if (lam.size() < 2) throw InconclusiveDestabilizer("xi has a single eigenvalue", 0);
  // components: xi commutes with the splitting when every eigenvector is a
  // coordinate vector; report the component carrying each eigenvector
  for (auto& c : cols) {
    std::vector<int> comp;
    for (int col : c) {
      int best = 0;
      for (int i = 1; i < r; ++i)
        if (std::abs(D.basis(i, col)) > std::abs(D.basis(best, col))) best = i;
      comp.push_back(best);
    }
    std::sort(comp.begin(), comp.end());
    D.blocks.push_back(comp);
  }
  // deformation in the eigenbasis: strictly lower part (by lambda order)
  std::vector<int> level(r);
  for (size_t q = 0; q < cols.size(); ++q)
    for (int col : cols[q]) level[col] = int(q);
  const Mat U = D.basis;
  const EndField Uf = constant(U, L.n2()), Ui = constant(U.adjoint(), L.n2());
  Form g = rep.point.gamma_b;
  for (int c = 0; c < 2; ++c) g.c[c] = mul(mul(Ui, g.c[c]), Uf);
  Form low = block_mask(g, [&](int i, int j) { return level[i] > level[j]; });
  const double scale = std::max(L.norm(rep.point.gamma_b, L.metric0()), 1e-300);
  D.lower = L.norm(low, L.metric0()) / scale;
  D.probe_time = 5.0 / (D.lambda[D.lambda.size() - 1] - D.lambda[0]);
  const Mat gT = (U * (D.probe_time * es.eigenvalues()).array().exp().matrix().asDiagonal() * U.adjoint());
  const CVec bT = S.act(gT, rep.final.b);
  D.decay = bT.norm() / std::max(rep.final.b.norm(), 1e-300);
  return D;
}

Pairing pairing_check(const Lattice& L, const Form& gamma, const Metric& m, const std::vector<int>& sub,
                      double l_S) {
  const int r = L.r();
  std::vector<bool> inS(r, false);
  for (int i : sub) {
    if (i < 0 || i >= r) throw ConfigError("pairing_check: projector component out of range");
    inS[i] = true;
  }
  const int rs = int(sub.size());
  if (rs == 0 || rs == r) throw ConfigError("pairing_check: sub-bundle must be proper and nonzero");
  EndField F = L.i_lambda_F(gamma, m);
  const RMat W = L.vol_weight(m);
  Pairing p;
  for (int i = 0; i < r; ++i) {
    const double w = inS[i] ? 1.0 / rs : -1.0 / (r - rs);
    p.lhs += w * (F(i, i).real().cwiseProduct(W)).sum();
  }
  Form beta = block_mask(gamma, [&](int i, int j) { return inS[i] && !inS[j]; });
  p.beta2 = L.inner(beta, beta, m);
  p.rhs = -2 * M_PI * l_S + (1.0 / rs + 1.0 / (r - rs)) * p.beta2;
  return p;
}

double a_norm(const Lattice& L, const Form& gamma, const Metric& m) {
  const double l2 = L.inner(gamma, gamma, m);
  const double grad = L.inner(gamma, L.laplacian01(gamma), L.metric0());
  return std::sqrt(l2 + std::max(0.0, grad));
}

BoundFit bound_verify(const std::vector<SweepPoint>& exact, const std::vector<SweepPoint>& moduli) {
  if (exact.size() < 4 || moduli.size() < 4)
    throw InsufficientData("bound_verify: need at least 4 sweep points on each path");
  BoundFit f;
  f.n = int(exact.size() + moduli.size());
  double lo = 1e300, hi = 0;
  for (auto* path : {&exact, &moduli})
    for (auto& p : *path) {
      const double e = p.eps.c0_norm();
      const double rhs = p.nu_norm + e * e + p.eps.class_norm();
      if (rhs <= 0) continue;
      const double q = p.b_norm * p.b_norm / rhs;
      f.C_norm = std::max(f.C_norm, q);
      if (q > 0) {
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
    }
  f.C_spread = hi > 0 ? hi / lo : 1;
  std::vector<double> x, y;
  lo = 1e300;
  hi = 0;
  for (auto& p : exact) {
    x.push_back(p.eps.c0_norm());
    y.push_back(p.dist);
    f.exact_C = std::max(f.exact_C, p.dist / x.back());
    lo = std::min(lo, p.dist / x.back());
    hi = std::max(hi, p.dist / x.back());
  }
  f.exact_spread = hi / lo;
  f.exact_slope = slope_fit(x, y);
  x.clear();
  y.clear();
  for (auto& p : moduli) {
    x.push_back(p.eps.class_norm());
    y.push_back(p.dist);
  }
  f.moduli_slope = slope_fit(x, y);
  return f;
}

RVec gamma_observables(const Lattice& L, const Form& gamma, const Metric& m) {
  const int r = L.r(), n2 = L.n2();
  EndField F = L.i_lambda_F(gamma, m);
  std::vector<double> ev;
  ev.reserve(size_t(n2) * n2 * r);
  Mat M(r, r);
  for (long s = 0; s < long(n2) * n2; ++s) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) M(i, j) = F(i, j).data()[s];
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    for (int i = 0; i < r; ++i) ev.push_back(es.eigenvalues()[i]);
  }
  std::sort(ev.begin(), ev.end());
  const int nq = 9;
  RVec out(nq + r * r + 1);
  for (int q = 0; q < nq; ++q) out[q] = ev[size_t(std::llround(double(q) / (nq - 1) * (ev.size() - 1)))];
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Form blk = block_mask(gamma, [&](int a, int b) { return a == i && b == j; });
      out[nq + i * r + j] = L.norm(blk, m);
    }
  out[nq + r * r] = L.hym_residual(gamma, m);
  return out;
}

}  // namespace hym::flow
