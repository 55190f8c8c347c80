#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "hym/linalg.hpp"

using namespace hym;

namespace {
const cd I(0, 1);

EndField scalar_field(const Lattice& L, cd v) { return constant(v * Mat::Identity(L.r(), L.r()), L.n2()); }

double rel(const EndField& a, const EndField& b, const Lattice& L) {
  return L.norm(a - b, L.metric0()) / std::max(1e-300, L.norm(b, L.metric0()));
}

// plain sum of |entries|^2 as a cross-check of the weighted norms
double sumsq(const EndField& a) {
  double s = 0;
  for (auto& m : a.b) s += m.squaredNorm();
  return s;
}
}  // namespace

TEST_CASE("contraction against the Kaehler form") {
  Lattice L(TorusGrid(8, 1.0, 1.0), fx::flat(2));
  Form w = L.zero_form(1, 1);
  w.c[0] = scalar_field(L, 0.5 * I * L.grid().t1);
  w.c[3] = scalar_field(L, 0.5 * I * L.grid().t2);
  CHECK(L.contract(w, L.metric0()).max_abs() == doctest::Approx(2.0));
  CHECK((L.contract(w, L.metric0()) - scalar_field(L, 2.0)).max_abs() < 1e-14);
  Form a1 = L.zero_form(1, 1);
  a1.c[0] = scalar_field(L, 0.5 * I);
  CHECK((L.contract(a1, L.metric0()) - scalar_field(L, 1.0)).max_abs() < 1e-14);
  Form off = L.zero_form(1, 1);
  off.c[1] = scalar_field(L, 3.0);
  CHECK(L.contract(off, L.metric0()).max_abs() == 0);
  Lattice L2(TorusGrid(8, 2.0, 3.0), fx::flat(1));
  Form w2 = L2.zero_form(1, 1);
  w2.c[0] = scalar_field(L2, 0.5 * I * 2.0);
  w2.c[3] = scalar_field(L2, 0.5 * I * 3.0);
  CHECK((L2.contract(w2, L2.metric0()) - scalar_field(L2, 2.0)).max_abs() < 1e-13);
}

TEST_CASE("plaquettes and base curvature") {
  FactorOps f(8, 3);
  double total = 0;
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      CHECK(f.plaquette_angle(x, y) == doctest::Approx(-2 * M_PI * 3 / 64.0));
      total += f.plaquette_angle(x, y);
    }
  CHECK(total == doctest::Approx(-2 * M_PI * 3));
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      CHECK(std::abs(f.ux(x, y)) == doctest::Approx(1.0));
      CHECK(std::abs(f.uy(x, y)) == doctest::Approx(1.0));
    }

  Lattice L(TorusGrid(8, 1.0, 1.0), fx::line(1, 0));
  EndField ilf = L.i_lambda_F(L.zero_form(0, 1), L.metric0());
  CHECK((ilf - scalar_field(L, 2 * M_PI)).max_abs() < 1e-10);
  Lattice Lf(TorusGrid(8, 1.0, 1.0), fx::flat(1));
  CHECK(Lf.i_lambda_F(Lf.zero_form(0, 1), Lf.metric0()).max_abs() < 1e-14);
}

TEST_CASE("curvature of a constant nilpotent deformation matches the operator commutator") {
  Lattice L(TorusGrid(8, 1.3, 0.7), fx::flat(2));
  Form g = L.zero_form(0, 1);
  g.c[0](0, 1).setConstant(cd(0.3, -0.1));
  g.c[1](0, 1).setConstant(cd(-0.2, 0.25));
  Form F = L.curvature(g);
  // E-valued test sections live in column 0
  EndField psi = random_field(2, L.n2(), 11);
  psi(0, 1).setZero();
  psi(1, 1).setZero();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      auto Dk = [&](const EndField& s) { return L.apply(Op::DbarF, k, s) + mul(g.c[k], s); };
      auto Dj = [&](const EndField& s) { return L.apply(Op::DB, j, s) - mul(adj(g.c[j]), s); };
      EndField c = Dj(Dk(psi)) - Dk(Dj(psi));
      EndField m = mul(F.c[2 * j + k], psi);
      CHECK((c - m).max_abs() < 1e-10 * (1 + m.max_abs()));
    }
}

TEST_CASE("i Lambda F is Hermitian and Chern-Weil is exact") {
  TorusGrid g(8, 1.2, 0.9);
  Lattice L(g, fx::t4x());
  Form gam = random_form(0, 1, 2, L.n2(), 5);
  gam *= 0.2;
  Metric m = Metric::make(g, Perturbation{0.01, -0.02, 0.05, 0.03});
  EndField X = L.i_lambda_F(gam, m);
  CHECK((X - adj(X)).max_abs() < 1e-12);
  const double integral = (trace(X).array() * (m.vol() * g.cell()).array()).sum().real();
  double pairing = 0;
  for (auto& f : L.bundle().flux) pairing += f.m1 * m.T2 + f.m2 * m.T1;
  CHECK(std::abs(integral - 2 * M_PI * pairing) < 1e-8);
  CHECK(std::abs(L.einstein_constant(m) * L.r() * m.T1 * m.T2 - integral) < 1e-8);
}

TEST_CASE("einstein constant") {
  CHECK(Lattice(TorusGrid(8, 1, 1), fx::t4x()).einstein_constant(Metric::make(TorusGrid(8, 1, 1))) == 0);
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::line(1, 0));
  CHECK(L.einstein_constant(L.metric0()) == doctest::Approx(2 * M_PI));
  Lattice L2(TorusGrid(8, 2, 2), fx::line(1, 0));
  CHECK(L2.einstein_constant(L2.metric0()) == doctest::Approx(M_PI));
}

TEST_CASE("hym residual") {
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::line(2, -1));
  CHECK(L.hym_residual(L.zero_form(0, 1), L.metric0()) < 1e-10);
  Lattice Le(g, fx::t4x());  // equal slopes at t1 = t2
  CHECK(Le.hym_residual(Le.zero_form(0, 1), Le.metric0()) < 1e-10);
  TorusGrid g2(8, 1.5, 1.0);
  Lattice Lu(g2, fx::t4x());
  const double mu1 = 2 * M_PI * (1 * 1.5 - 1 * 1.0) / 1.5;  // slope form c1.theta / Vol
  const double expect = std::sqrt(2 * mu1 * mu1 * 1.5);
  CHECK(Lu.hym_residual(Lu.zero_form(0, 1), Lu.metric0()) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("Laplacians on sections") {
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::flat(1));
  EndField one = scalar_field(L, 1.0);
  CHECK(L.laplacian(LapKind::Nabla, one).max_abs() < 1e-12);
  // plane wave: closed-form symbol of the forward stencil
  const int N = g.N;
  for (int kx : {1, 2}) {
    EndField pw = L.zero();
    for (int p1 = 0; p1 < L.n2(); ++p1)
      for (int p2 = 0; p2 < L.n2(); ++p2) {
        const int x1 = p1 / N, y2 = p2 % N;
        pw(0, 0)(p1, p2) = std::polar(1.0, 2 * M_PI * (kx * x1 + y2) / N);
      }
    EndField lp = L.laplacian(LapKind::Nabla, pw);
    auto sym = [&](int k) { return (2 - 2 * std::cos(2 * M_PI * k / N)) * N * N; };
    const double lam = L.w(0) * 0.5 * sym(kx) + L.w(1) * 0.5 * sym(1);
    CHECK((lp - cd(lam) * pw).max_abs() < 1e-9 * lam);
    CHECK(lam > 0);
    CHECK(lam < 4 * M_PI * M_PI * (kx * kx + 1));
  }
  Lattice Lx(g, fx::t4x());
  EndField s = random_field(2, Lx.n2(), 3);
  EndField sum = Lx.laplacian(LapKind::Del, s) + Lx.laplacian(LapKind::Dbar, s);
  CHECK((Lx.laplacian(LapKind::Nabla, s) - sum).max_abs() < 1e-12 * Lx.laplacian(LapKind::Nabla, s).max_abs());
}

TEST_CASE("plane-wave eigenvalue converges to the continuum value") {
  double prev = 1e9;
  for (int N : {8, 16, 32}) {
    const double lam = (2 - 2 * std::cos(2 * M_PI / N)) * N * N;
    const double err = std::abs(lam - 4 * M_PI * M_PI);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("discrete adjointness") {
  TorusGrid g(8, 1.1, 0.8);
  Lattice L(g, fx::t4x());
  const Metric& m = L.metric0();
  EndField s = random_field(2, L.n2(), 1);
  Form a = random_form(0, 1, 2, L.n2(), 2);
  Form c = random_form(0, 2, 2, L.n2(), 3);
  // two-copy dbar on sections and on (0,1)-forms
  Form ds = L.zero_form(0, 1);
  for (int k = 0; k < 2; ++k) ds.c[k] = cd(0.5) * (L.apply(Op::DbarF, k, s) + L.apply(Op::DbarB, k, s));
  CHECK(std::abs(L.cinner(ds, a, m) - cinner(s, L.dbar_star(a), L.vol_weight(m))) < 1e-12 * L.norm(ds, m) * L.norm(a, m));
  Form da = L.zero_form(0, 2);
  da.c[0] = cd(0.5) * (L.apply(Op::DbarF, 0, a.c[1]) + L.apply(Op::DbarB, 0, a.c[1]) -
                       L.apply(Op::DbarF, 1, a.c[0]) - L.apply(Op::DbarB, 1, a.c[0]));
  CHECK(std::abs(L.cinner(da, c, m) - L.cinner(a, L.dbar01_star(c), m)) < 1e-12 * L.norm(da, m) * L.norm(c, m));
  // forward and backward factor operators
  for (int k = 0; k < 2; ++k) {
    EndField t = random_field(2, L.n2(), 9);
    const RMat W = L.vol_weight(m);
    for (Op op : {Op::DbarF, Op::DF, Op::DbarB, Op::DB})
      CHECK(std::abs(cinner(L.apply(op, k, s), t, W) - cinner(s, L.apply_adj(op, k, t), W)) < 1e-12 * sumsq(s) * 1e3);
  }
  // Laplacians are Hermitian
  EndField s2 = random_field(2, L.n2(), 4);
  const RMat W = L.vol_weight(m);
  for (auto k : {LapKind::Nabla, LapKind::Del, LapKind::Dbar})
    CHECK(std::abs(cinner(L.laplacian(k, s), s2, W) - cinner(s, L.laplacian(k, s2), W)) < 1e-9);
}

TEST_CASE("two-copy Laplacian on (0,1)-forms equals the averaged Hodge Laplacians") {
  TorusGrid g(8, 1.1, 0.8);
  Lattice L(g, fx::t4x());
  Form a = random_form(0, 1, 2, L.n2(), 21);
  // single-copy Hodge Laplacian for a given pair of factor operators
  auto hodge = [&](Op d) {
    Form o = L.zero_form(0, 1);
    EndField star = L.zero();
    for (int k = 0; k < 2; ++k) star += cd(L.w(k)) * L.apply_adj(d, k, a.c[k]);
    EndField curl = L.apply(d, 0, a.c[1]) - L.apply(d, 1, a.c[0]);
    o.c[0] = L.apply(d, 0, star) - cd(L.w(1)) * L.apply_adj(d, 1, curl);
    o.c[1] = L.apply(d, 1, star) + cd(L.w(0)) * L.apply_adj(d, 0, curl);
    return o;
  };
  Form avg = hodge(Op::DbarF) + hodge(Op::DbarB);
  avg *= 0.5;
  Form lap = L.laplacian01(a);
  CHECK(L.norm(lap - avg, L.metric0()) < 1e-11 * L.norm(lap, L.metric0()));
  // inverse round trip
  Form x = L.solve01(lap, 1e-9);
  Form back = L.laplacian01(x);
  CHECK(L.norm(back - lap, L.metric0()) < 1e-9 * L.norm(lap, L.metric0()));
  Form c = random_form(0, 2, 2, L.n2(), 22);
  Form c2 = L.laplacian02(L.solve02(c, 1e-12));
  // flat diagonal blocks have a constant kernel which the pseudo-inverse drops
  CHECK(L.norm(c2 - c, L.metric0()) < L.norm(c, L.metric0()));
}

TEST_CASE("green_solve") {
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::t4x());
  // eigenvector rhs: plane wave in a flat block
  const int N = g.N;
  EndField v = L.zero();
  for (int p1 = 0; p1 < L.n2(); ++p1)
    for (int p2 = 0; p2 < L.n2(); ++p2) v(0, 0)(p1, p2) = std::polar(1.0, 2 * M_PI * (p1 / N) / N);
  EndField Lv = L.laplacian(LapKind::Nabla, v);
  const double lam = (Lv(0, 0)(0, 0) / v(0, 0)(0, 0)).real();
  auto res = L.green_solve(v, 1e-12);
  CHECK(rel(res.x, cd(1.0 / lam) * v, L) < 1e-10);
  // kernel rhs
  EndField k = scalar_field(L, 1.0);
  auto rk = L.green_solve(k, 1e-12);
  CHECK(rk.x.max_abs() < 1e-12);
  CHECK(rk.projected == doctest::Approx(L.norm(k, L.metric0())));
  // random round trip
  EndField rnd = random_field(2, L.n2(), 8);
  auto rr = L.green_solve(rnd, 1e-10);
  EndField rp = L.project_off(L.section_kernel(), rnd, L.vol_weight(L.metric0()));
  CHECK(rel(L.laplacian(LapKind::Nabla, rr.x), rp, L) < 1e-9);
  CHECK(L.section_kernel().size() == 2);
}

TEST_CASE("Kaehler identities") {
  Lattice Lf(TorusGrid(8, 1, 1), fx::flat(2));
  auto kf = Lf.kahler_residuals(3, 17);
  CHECK(kf.first < 1e-10);
  CHECK(kf.second < 1e-10);
  CHECK(kf.third < 1e-10);
  auto k8 = Lattice(TorusGrid(8, 1, 1), fx::t4x()).kahler_residuals(3, 17);
  CHECK(k8.first < 1e-10);
  CHECK(k8.second < 1e-10);
  CHECK(k8.third > 1e-6);  // lattice artifact on flux data
  Lattice Z(TorusGrid(8, 1, 1), fx::t4x());
  CHECK(Z.kahler_residuals(0, 1).third == 0);
}

TEST_CASE("gauge action") {
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::t4x());
  Form gam = L.zero_form(0, 1);
  gam.c[0](0, 1) = random_field(1, L.n2(), 4).b[0];
  gam.c[1](0, 1) = random_field(1, L.n2(), 5).b[0];
  gam *= 0.1;
  Form same = L.gauge_act(identity(2, L.n2()), gam);
  CHECK(L.norm(same - gam, L.metric0()) < 1e-14);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  Form sc = L.gauge_act(constant(d, L.n2()), gam);
  CHECK((sc.c[0](0, 1) - 4.0 * gam.c[0](0, 1)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(sc.c[0](1, 0).cwiseAbs().maxCoeff() < 1e-14);
  // constant unitary automorphism
  Mat u = Mat::Zero(2, 2);
  u(0, 0) = std::polar(1.0, 0.7);
  u(1, 1) = std::polar(1.0, -1.1);
  Form ug = L.gauge_act(constant(u, L.n2()), gam);
  Metric m = Metric::make(g, Perturbation{0.01, 0, 0.02, 0});
  CHECK(std::abs(L.hym_residual(ug, m) - L.hym_residual(gam, m)) < 1e-10);
  // curvature conjugates
  Form F = L.curvature(gam), Fu = L.curvature(ug);
  EndField U = constant(u, L.n2());
  for (int c = 0; c < 4; ++c) CHECK((Fu.c[c] - mul(mul(U, F.c[c]), adj(U))).max_abs() < 1e-12);
  // flat rank-2 bundle: any constant unitary
  Lattice Lf(g, fx::flat(2));
  Form gf = random_form(0, 1, 2, Lf.n2(), 31);
  gf *= 0.1;
  Mat q = Eigen::HouseholderQR<Mat>(Mat::Random(2, 2)).householderQ();
  Form gq = Lf.gauge_act(constant(q, Lf.n2()), gf);
  CHECK(std::abs(Lf.hym_residual(gq, Lf.metric0()) - Lf.hym_residual(gf, Lf.metric0())) < 1e-10);
  // singular f
  EndField z = Lf.zero();
  CHECK_THROWS_AS(Lf.gauge_act(z, gf), ConfigError);
}

TEST_CASE("kernel of the real Laplacian equals ker dbar on a flat bundle") {
  TorusGrid g(8, 1, 1);
  Lattice L(g, fx::flat(1));
  auto toF = [&](const Vec& v) {
    EndField f = L.zero();
    unflatten(v, f);
    return f;
  };
  auto Lap = [&](const Vec& v) { return flatten(L.laplacian(LapKind::Nabla, toF(v))); };
  auto DbD = [&](const Vec& v) {
    return flatten(L.laplacian(LapKind::Dbar, toF(v)));
  };
  Mat X0 = Mat::Random(L.zero().size(), 3);
  auto Id = [](const Vec& v) { return v; };
  auto e1 = linalg::lobpcg(Lap, Id, X0, 1e-9, 2000);
  auto e2 = linalg::lobpcg(DbD, Id, X0, 1e-9, 2000);
  CHECK(e1.values[0] < 1e-8);
  CHECK(e2.values[0] < 1e-8);
  CHECK(e1.values[1] > 1e-2);
  CHECK(e2.values[1] > 1e-2);
  // principal angle between the one-dimensional kernels
  const double c = std::abs(e1.vectors.col(0).dot(e2.vectors.col(0)));
  CHECK(std::acos(std::min(1.0, c)) < 1e-6);
}

TEST_CASE("snapshot round trip") {
  Lattice L(TorusGrid(4, 1, 1), fx::t4x());
  Form f = random_form(0, 1, 2, L.n2(), 77);
  auto path = std::filesystem::temp_directory_path() / "hym_snapshot_test.bin";
  write_snapshot(path.string(), f, 4);
  int N = 0;
  Form g = read_snapshot(path.string(), &N);
  CHECK(N == 4);
  CHECK(g.p == 0);
  CHECK(g.q == 1);
  CHECK(L.norm(g - f, L.metric0()) == 0);
  CHECK(std::filesystem::file_size(path) == 24 + 2 * 4 * 256 * 16);
  std::filesystem::remove(path);
}
