// Acceptance suite: one PASS/FAIL line per criterion, measured values alongside.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "cone_oracle.hpp"
#include "fixtures.hpp"
#include "hym/cli/pipeline.hpp"
#include "hym/flow.hpp"

using namespace hym;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int k, const std::string& name, bool pass, const std::string& detail) {
  std::cout << "criterion " << k << " " << (pass ? "PASS" : "FAIL") << "  " << name << ": " << detail << std::endl;
  failures += !pass;
}

std::string g(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

double secs(clk::time_point t) { return std::chrono::duration<double>(clk::now() - t).count(); }

CVec random_b(int d, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVec b(d);
  for (int i = 0; i < d; ++i) b[i] = cd(nd(rng), nd(rng));
  return b * (radius / b.norm());
}

void cone_oracle() {
  const auto t0 = clk::now();
  std::mt19937_64 rng(2024);
  double engine = 0;
  long checks = 0, bad_kind = 0, bad_walls = 0, bad_max = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t d = 1 + inst % 4;
    const std::size_t nD = 1 + std::uniform_int_distribution<int>(0, 49)(rng);
    auto I = oracle::random_instance(rng, d, nD);
    auto te = clk::now();
    auto C = cone::build_cones(I.total, I.D, I.K);
    auto F = cone::finite_reduction(I.D, I.K);
    engine += secs(te);
    std::vector<cone::SlopeDatum> DF;
    for (auto i : F) DF.push_back(I.D[i]);
    for (int k = 0; k < 200; ++k) {
      auto p = oracle::random_point(rng, I.K);
      ++checks;
      bad_max += oracle::brute_max_slope(I.D, p) != oracle::brute_max_slope(DF, p);
      auto vb = oracle::brute_classify(I, p);
      te = clk::now();
      auto vc = cone::classify(p, C);
      engine += secs(te);
      bad_kind += vb.kind != vc.kind;
      for (auto w : vc.walls)
        bad_walls += std::find(vb.walls.begin(), vb.walls.end(), C.walls[w].source_index) == vb.walls.end();
    }
  }
  const double total = secs(t0);
  // the limit applies to the engine; brute-force reference time is reported alongside
  const double t = engine;
  report(1, "cone oracle equivalence", bad_kind == 0 && bad_walls == 0 && bad_max == 0 && t < 5,
         std::to_string(checks) + " classifications, kind mismatches " + std::to_string(bad_kind) +
             ", wall mismatches " + std::to_string(bad_walls) + ", max-slope mismatches " + std::to_string(bad_max) +
             ", engine " + g(t) + " s (with brute-force reference " + g(total) + " s)");
}

void kahler() {
  const Lattice flat(TorusGrid(8, 1.0, 1.0), fx::flat(2));
  const auto f = flat.kahler_residuals(4, 11);
  const double flat_max = std::max({f.first, f.second, f.third});
  const Lattice l8(TorusGrid(8, 1.0, 1.0), fx::t4x()), l16(TorusGrid(16, 1.0, 1.0), fx::t4x());
  const auto a = l8.kahler_residuals(4, 11), b = l16.kahler_residuals(4, 11);
  const double ratio = a.third / b.third;
  report(2, "Kaehler identities", flat_max <= 1e-10 && ratio >= 1.6 && ratio <= 2.4,
         "flat max residual " + g(flat_max) + "; flux third identity N=8 " + g(a.third) + ", N=16 " + g(b.third) +
             ", ratio " + g(ratio) + " (window [1.6, 2.4]; first/second " + g(std::max(a.first, a.second)) + ")");
}

void chern_weil() {
  const Lattice L(TorusGrid(8, 1.0, 1.0), fx::t4x());
  double worst_cw = 0, worst_c = 0;
  for (auto e : {Perturbation{}, Perturbation{0.02, -0.01, 0.0, 0.0}, Perturbation{0.01, 0.03, 0.02, -0.015}}) {
    const Metric m = Metric::make(L.grid(), e);
    const EndField F = L.i_lambda_F(L.zero_form(0, 1), m);
    const RMat W = L.vol_weight(m);
    double tr = 0;
    for (int i = 0; i < L.r(); ++i) {
      const double integral = (F(i, i).real().cwiseProduct(W)).sum();
      const auto& fl = L.bundle().flux[i];
      const double expect = 2 * M_PI * (fl.m1 * m.T2 + fl.m2 * m.T1);
      worst_cw = std::max(worst_cw, std::abs(integral - expect));
      tr += integral;
    }
    const double vol = W.sum();
    worst_c = std::max(worst_c, std::abs(L.einstein_constant(m) * L.r() * vol - tr));
  }
  report(3, "Chern-Weil exactness", worst_cw <= 1e-8 && worst_c <= 1e-8,
         "max |int tr iLF - 2pi pairing| " + g(worst_cw) + ", einstein constant mismatch " + g(worst_c));
}

void linearization(const Slice& S) {
  const Lattice& L = S.lattice();
  const Form g0 = S.kuranishi_phi(CVec::Zero(S.V().dim()));
  const RMat W = L.vol_weight(L.metric0());
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    EndField u = herm_part(random_field(L.r(), L.n2(), 500 + k));
    u = S.project_kernel_off(u, W);
    u *= 1.0 / L.norm(u, L.metric0());
    const double h = 1e-5;
    EndField dp = S.psi({}, g0, h * u) - S.psi({}, g0, (-h) * u);
    dp *= 1.0 / (2 * h);
    EndField ref = S.project_kernel_off(L.laplacian(LapKind::Nabla, u), W);
    worst = std::max(worst, L.norm(dp - ref, L.metric0()) / L.norm(ref, L.metric0()));
  }
  report(4, "linearization", worst <= 1e-3, "max relative error over 20 directions " + g(worst));
}

void dimensions(const Slice& S) {
  const Lattice& L = S.lattice();
  int kV = 0, kK = 0;
  for (int i = 0; i < L.r(); ++i)
    for (int j = 0; j < L.r(); ++j) {
      for (auto fam : {Lattice::Family::Form01a, Lattice::Family::Form01b}) {
        auto s = L.block_spectrum(fam, i, j);
        for (long q = 0; q < s.size(); ++q) kV += s[q] <= S.V().threshold;
      }
      auto s = L.block_spectrum(Lattice::Family::Sections, i, j);
      for (long q = 0; q < s.size(); ++q) kK += s[q] <= S.K().threshold;
    }
  // the kernel of Delta_0 on sections is spanned by Id and k; the oracle
  // counts complex kernel dimension = dim k + 1 for the centre
  const bool ok = S.V().dim() == 12 && S.K().dim() == 1 && S.V().gap >= 10 * S.V().threshold &&
                  S.K().gap >= 10 * S.K().threshold && kV == S.V().dim() && kK == S.K().dim() + 1;
  report(5, "slice dimensions", ok,
         "dim V " + std::to_string(S.V().dim()) + " (Kunneth " + std::to_string(kV) + "), gap/threshold " +
             g(S.V().gap / S.V().threshold) + "; dim k " + std::to_string(S.K().dim()) + " (kernel " +
             std::to_string(kK) + " incl. centre), gap/threshold " + g(S.K().gap / S.K().threshold));
}

void perturbation(const Slice& S) {
  const Lattice& L = S.lattice();
  const int d = S.V().dim();
  auto p0 = S.sigma_solve({}, CVec::Zero(d));
  const double s0 = L.norm(p0.s, L.metric0());
  std::mt19937_64 rng(31);
  // slope of |sigma(0, t v)| in t at 0, least squares through the origin
  double dsig = 0;
  for (int k = 0; k < 4; ++k) {
    const CVec v = random_b(d, 1.0, rng);
    double sxy = 0, sxx = 0;
    for (double t : {1e-3, 2e-3, 4e-3}) {
      const double s = L.norm(S.sigma_solve({}, t * v).s, L.metric0());
      sxy += t * s;
      sxx += t * t;
    }
    dsig = std::max(dsig, sxy / sxx);
  }
  const CVec v = random_b(d, 1.0, rng);
  double lo = 1e300, hi = 0;
  for (double t : {0.2, 0.11, 0.063, 0.035, 0.02}) {
    Perturbation e;
    e.dt1 = 0.5 * t * t;
    e.dt2 = -0.5 * t * t;
    e.amp1 = 0.25 * t * t;
    const double q = L.norm(S.sigma_solve(e, t * v).s, L.metric0()) / (e.c0_norm() + t * t);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const double tol = S.params().tol_sigma * S.curvature_scale();
  report(6, "perturbation sigma", s0 <= tol && dsig <= 1e-3 && hi / lo <= 10,
         "|sigma(0,0)| " + g(s0) + "; fitted |dsigma/db| at 0 " + g(dsig) + " (target 1e-3); C range " + g(lo) +
             ".." + g(hi) + " over a decade");
}

void moment_map(const Slice& S) {
  const int d = S.V().dim();
  std::mt19937_64 rng(41);
  Perturbation e;
  e.dt1 = 0.01;
  e.dt2 = -0.01;
  double equiv = 0, min_omega = 1e300, moment = 0;
  for (int pt = 0; pt < 2; ++pt) {
    const CVec b = random_b(d, 0.15 + 0.1 * pt, rng);
    auto p = S.sigma_solve(e, b);
    for (double th : {0.4, 1.3}) {
      const Mat gk = Mat(th * S.K().k[0]).exp();
      equiv = std::max(equiv, (S.sigma_solve(e, S.act(gk, b)).nu - p.nu).norm());
    }
    for (int n = 0; n < d; ++n) {
      const CVec u = CVec::Unit(d, n);
      min_omega = std::min(min_omega, S.omega(e, b, u, cd(0, 1) * u));
    }
    const CVec v = random_b(d, 1.0, rng);
    const double h = 1e-4;
    const double lhs = (S.sigma_solve(e, b + h * v).nu[0] - S.sigma_solve(e, b - h * v).nu[0]) / (2 * h);
    RVec a(1);
    a << 1;
    const double rhs = S.omega(e, b, S.infinitesimal(a, b), v);
    moment = std::max(moment, std::abs(lhs - rhs) / std::abs(rhs));
  }
  report(7, "moment-map structure", equiv <= 1e-8 && min_omega > 0 && moment <= 1e-3,
         "equivariance defect " + g(equiv) + ", min Omega(v, iv) " + g(min_omega) + ", moment property error " +
             g(moment));
}

void scenario_criteria() {
  namespace fs = std::filesystem;
  const auto sc = cli::load_scenario(std::string(HYM_SOURCE_DIR) + "/scenarios/t4x.json");
  const fs::path out = fs::temp_directory_path() / "hym_acceptance";
  fs::remove_all(out);
  fs::create_directories(out);
  auto runs = cli::run_flow(sc, 1);
  for (auto& r : runs) {
    const std::string k = std::to_string(r.index);
    cli::write_file((out / ("flow_" + k + ".json")).string(), cli::dump(cli::flow_json(sc, r)));
    if (r.error.empty()) cli::write_file((out / ("traj_" + k + ".csv")).string(), cli::traj_csv(r));
  }
  const auto rows = cli::verify(sc, out.string());
  auto group = [&](int k, const std::string& name, std::vector<std::string> ids) {
    bool pass = true;
    std::string detail;
    for (auto& id : ids)
      for (auto& r : rows)
        if (r.id == id) {
          pass &= r.pass;
          if (!detail.empty()) detail += "; ";
          detail += id + " " + g(r.measured) + (r.pass ? "" : " [fail]") + (r.note.empty() ? "" : " (" + r.note + ")");
        }
    report(k, name, pass, detail);
  };
  group(8, "flow invariants", {"runs_definite", "monotonicity", "orbit_identity", "donaldson_decrease"});
  group(9, "wall-crossing outcomes", {"stable_converged", "unstable_destabilized", "destabilizer_decay", "pairing"});
  group(10, "quantitative bounds",
        {"sweep_constant", "exact_slope", "moduli_slope", "lipschitz", "block_norms"});
}

}  // namespace

int main(int argc, char** argv) {
  cone_oracle();
  if (argc > 1 && std::string(argv[1]) == "--cone-only") return failures ? 1 : 0;
  kahler();
  chern_weil();
  const Lattice L(TorusGrid(8, 1.0, 1.0), fx::t4x());
  const Slice S(L);
  linearization(S);
  dimensions(S);
  perturbation(S);
  moment_map(S);
  scenario_criteria();
  std::cout << (10 - failures) << "/10 criteria pass" << std::endl;
  return failures ? 1 : 0;
}
