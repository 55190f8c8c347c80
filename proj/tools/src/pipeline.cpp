#include "hym/cli/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace hym::cli {

using nlohmann::json;

namespace {

json qjson(const cone::QVec& v) {
  json a = json::array();
  for (auto& q : v) a.push_back(cone::to_string(q));
  return a;
}

// positive rescaling to coprime integers
cone::QVec primitive(const cone::QVec& v) {
  mpz_class l = 1, g = 0;
  for (auto& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
  std::vector<mpz_class> z;
  for (auto& q : v) {
    mpz_class n = q.get_num() * (l / q.get_den());
    z.push_back(n);
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  cone::QVec out;
  for (auto& n : z) out.emplace_back(g == 0 ? mpz_class(0) : mpz_class(n / g));
  return out;
}

json verdict_json(const cone::Verdict& v, const cone::StabilityCone& C) {
  json w = json::array();
  for (auto i : v.walls) w.push_back(C.walls[i].source_index);
  return {{"verdict", cone::verdict_name(v.kind)}, {"walls", w}};
}

json cvec_json(const CVec& b) {
  json re = json::array(), im = json::array();
  for (long i = 0; i < b.size(); ++i) {
    re.push_back(b[i].real());
    im.push_back(b[i].imag());
  }
  return {{"re", re}, {"im", im}};
}

json eps_json(const Perturbation& e) {
  return {{"dt1", e.dt1}, {"dt2", e.dt2}, {"amp1", e.amp1}, {"amp2", e.amp2}};
}

cone::StabilityCone cone_of(const Scenario& sc) {
  std::vector<cone::SlopeDatum> D;
  for (auto& c : sc.candidates) D.push_back(c.datum);
  return cone::build_cones(sc.total, D, sc.region);
}

double finite_or(double x, double fallback) { return std::isfinite(x) ? x : fallback; }

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("verify: missing report " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    if (r.size() != 6) throw ConfigError("verify: malformed trajectory row in " + path);
    rows.push_back(r);
  }
  return rows;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("verify: missing report " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("verify: malformed report " + path + ": " + e.what());
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

json run_cone(const Scenario& sc) {
  std::vector<cone::SlopeDatum> D;
  for (auto& c : sc.candidates) D.push_back(c.datum);
  const auto C = cone::build_cones(sc.total, D, sc.region);
  json j;
  j["name"] = sc.name;
  j["total"] = {{"c1", qjson(sc.total.c1)}, {"rank", sc.total.rank}};
  json cands = json::array();
  for (auto& c : sc.candidates)
    cands.push_back({{"tag", c.tag}, {"c1", qjson(c.datum.c1)}, {"rank", c.datum.rank}, {"components", c.components}});
  j["candidates"] = cands;
  json walls = json::array();
  for (auto& w : C.walls)
    walls.push_back({{"coeffs", qjson(w.coeffs)},
                     {"primitive", qjson(primitive(w.coeffs))},
                     {"source_index", w.source_index},
                     {"tag", sc.candidates[w.source_index].tag},
                     {"zero", w.zero}});
  j["walls"] = walls;
  j["empty_stable"] = C.empty_stable;
  j["min_max_slope"] = cone::to_string(cone::min_max_slope(D, sc.region));
  j["finite_reduction"] = cone::finite_reduction(D, sc.region);
  auto classify_json = [&](const cone::ThetaClass& th) {
    json p = {{"theta", qjson(th.coords)}};
    try {
      const auto v = cone::classify(th, C);
      p.update(verdict_json(v, C));
      if (v.kind != cone::VerdictKind::Unstable) {
        const auto f = cone::face_of(th, C);
        json act = json::array();
        for (auto i : f.active) act.push_back(C.walls[i].source_index);
        p["face"] = {{"active", act}, {"dim", f.dim}};
      }
    } catch (const cone::DomainError& e) {
      p["verdict"] = "OutsideRegion";
      p["error"] = e.what();
    }
    return p;
  };
  j["theta0"] = classify_json(sc.theta0());
  json probes = json::array();
  for (auto& th : sc.probes) probes.push_back(classify_json(th));
  j["probes"] = probes;
  json faces = json::array();
  for (auto& f : cone::face_lattice(C)) {
    json act = json::array();
    for (auto i : f.active) act.push_back(C.walls[i].source_index);
    faces.push_back({{"active", act}, {"dim", f.dim}});
  }
  j["faces"] = faces;
  return j;
}

std::vector<FlowRun> run_flow(const Scenario& sc, unsigned threads) {
  std::vector<FlowRun> runs;
  for (std::size_t p = 0; p < sc.paths.size(); ++p)
    for (double s : sc.paths[p].scales) {
      FlowRun r;
      r.index = int(runs.size());
      r.path = int(p);
      r.scale = s;
      r.eps = sc.perturbation(sc.paths[p], s);
      runs.push_back(r);
    }
  if (runs.empty()) return runs;

  const auto C = cone_of(sc);
  for (auto& r : runs) r.predicted = cone::classify(sc.theta(r.eps), C);

  const Lattice L(sc.grid, sc.bundle);
  HarmonicBasis V = harmonic_basis(L, sc.tau_V, sc.seed);
  AutAlgebra K = aut_algebra(L, V, sc.tau_K, sc.seed + 1);
  const Slice S(L, std::move(V), std::move(K), sc.slice);

  auto b0_for = [&](const EpsPath& path) {
    const double amp = path.has_b0 ? path.b0_amplitude : sc.b0_amplitude;
    CVec b = CVec::Zero(S.V().dim());
    for (int n = 0; n < S.V().dim(); ++n)
      if (S.V().tag[n][0] == sc.b0_block_i && S.V().tag[n][1] == sc.b0_block_j) b[n] = amp;
    return b;
  };

  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      FlowRun& r = runs[i];
      const EpsPath& path = sc.paths[r.path];
      try {
        r.report = flow::integrate(S, r.eps, b0_for(path), sc.flow);
        const Metric m = S.metric(r.eps);
        r.observables = flow::gamma_observables(L, r.report.point.gamma, m);
        r.dist = flow::a_norm(L, r.report.point.gamma, m);
        for (auto& c : sc.candidates) {
          if (c.components.empty()) continue;
          PairingRow pr;
          pr.tag = c.tag;
          pr.l = cone::evaluate(cone::wall_functional(c.datum, sc.total), sc.theta(r.eps)).get_d();
          pr.value = flow::pairing_check(L, r.report.point.gamma_b, m, c.components, pr.l);
          r.pairing.push_back(pr);
        }
        if (r.report.outcome == flow::Outcome::BudgetExceeded) r.status = kBudget;
      } catch (const SolverError& e) {
        r.status = kSolver;
        r.error = e.what();
      }
      std::lock_guard<std::mutex> lk(log);
      std::cerr << "run " << r.index << " (" << path.name << ", scale " << r.scale << "): "
                << (r.error.empty() ? flow::outcome_name(r.report.outcome) : r.error) << "\n";
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, unsigned(runs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

int flow_exit_code(const std::vector<FlowRun>& runs) {
  int code = kOk;
  for (auto& r : runs) {
    if (r.status == kSolver) return kSolver;
    if (r.status == kBudget) code = kBudget;
  }
  return code;
}

json flow_json(const Scenario& sc, const FlowRun& r) {
  const auto& rep = r.report;
  const auto C = cone_of(sc);
  json j;
  j["index"] = r.index;
  j["path"] = sc.paths[r.path].name;
  j["kind"] = sc.paths[r.path].kind;
  j["purpose"] = sc.paths[r.path].purpose;
  j["scale"] = r.scale;
  j["eps"] = eps_json(r.eps);
  j["eps_norm"] = r.eps.c0_norm();
  j["class_norm"] = r.eps.class_norm();
  j["theta"] = qjson(sc.theta(r.eps).coords);
  j["predicted"] = verdict_json(r.predicted, C);
  if (!r.error.empty()) {
    j["outcome"] = "Error";
    j["error"] = r.error;
    return j;
  }
  j["outcome"] = flow::outcome_name(rep.outcome);
  j["diagnostics"] = rep.diagnostics;
  j["halvings"] = rep.halvings;
  j["b_start"] = cvec_json(rep.b_start);
  j["b_final"] = cvec_json(rep.final.b);
  j["b_norm"] = rep.final.b.norm();
  j["t_final"] = rep.final.t;
  j["phi_final"] = rep.final.phi;
  j["nu_norm"] = rep.final.nu_norm;
  j["nu"] = std::vector<double>(rep.point.nu.data(), rep.point.nu.data() + rep.point.nu.size());
  j["off_k"] = rep.point.off_k;
  j["sigma_residual"] = rep.point.residual;
  j["hym_residual"] = rep.rows.back().hym_residual;
  j["steps"] = int(rep.rows.size()) - 1;
  j["rejected"] = rep.rejected;
  j["rejected_monotone"] = rep.rejected_monotone;
  j["max_orbit_err"] = rep.max_orbit_err;
  j["max_nu_increase"] = rep.max_nu_increase;
  j["cond_g"] = finite_or(rep.cond_g, 1e300);
  j["phi_ratio_fraction"] = rep.phi_ratio_fraction;
  j["max_s_norm"] = rep.max_s_norm;
  j["min_phi"] = rep.min_phi;
  j["dist"] = r.dist;
  j["observables"] = std::vector<double>(r.observables.data(), r.observables.data() + r.observables.size());
  json pr = json::array();
  for (auto& p : r.pairing)
    pr.push_back({{"tag", p.tag}, {"l", p.l}, {"lhs", p.value.lhs}, {"rhs", p.value.rhs}, {"beta2", p.value.beta2}});
  j["pairing"] = pr;
  if (rep.destab) {
    const auto& D = *rep.destab;
    json xi = json::array();
    for (int a = 0; a < D.xi.rows(); ++a) {
      json row = json::array();
      for (int b = 0; b < D.xi.cols(); ++b) row.push_back({D.xi(a, b).real(), D.xi(a, b).imag()});
      xi.push_back(row);
    }
    j["destabilizer"] = {{"xi", xi},
                         {"lambda", std::vector<double>(D.lambda.data(), D.lambda.data() + D.lambda.size())},
                         {"blocks", D.blocks},
                         {"lower", D.lower},
                         {"probe_time", D.probe_time},
                         {"decay", D.decay}};
  }
  return j;
}

std::string traj_csv(const FlowRun& r) {
  std::string s = "t,nu_norm,phi,b_norm,step,hym_residual\n";
  for (auto& row : r.report.rows)
    s += fmt(row.t) + "," + fmt(row.nu_norm) + "," + fmt(row.phi) + "," + fmt(row.b_norm) + "," + fmt(row.step) +
         "," + fmt(row.hym_residual) + "\n";
  return s;
}

std::vector<VerdictRow> verify(const Scenario& sc, const std::string& dir) {
  namespace fs = std::filesystem;
  const auto C = cone_of(sc);
  struct Item {
    json rep;
    std::vector<std::vector<double>> traj;
    const EpsPath* path;
  };
  std::vector<Item> items;
  int k = 0;
  for (auto& p : sc.paths)
    for (std::size_t q = 0; q < p.scales.size(); ++q, ++k) {
      Item it;
      it.rep = read_json((fs::path(dir) / ("flow_" + std::to_string(k) + ".json")).string());
      if (it.rep.value("outcome", "") != "Error")
        it.traj = read_csv((fs::path(dir) / ("traj_" + std::to_string(k) + ".csv")).string());
      it.path = &p;
      items.push_back(std::move(it));
    }

  std::vector<VerdictRow> rows;
  auto add = [&](std::string id, std::string what, double measured, std::string thr, bool pass, std::string note = "") {
    rows.push_back({std::move(id), std::move(what), measured, std::move(thr), pass, std::move(note)});
  };
  auto predicted = [](const Item& it) { return it.rep["predicted"]["verdict"].get<std::string>(); };
  auto errored = [](const Item& it) { return it.rep["outcome"] == "Error"; };

  int errors = 0;
  for (auto& it : items) errors += errored(it);
  add("runs_definite", "every run reached a definite outcome", errors, "0 errors", errors == 0);

  // flow invariants from the trajectories
  double max_inc = 0, max_orbit = 0;
  int good = 0, tot = 0;
  for (auto& it : items) {
    if (errored(it)) continue;
    max_orbit = std::max(max_orbit, it.rep["max_orbit_err"].get<double>());
    for (std::size_t i = 1; i < it.traj.size(); ++i)
      max_inc = std::max(max_inc, it.traj[i][1] - it.traj[i - 1][1]);
    if (predicted(it) == cone::verdict_name(cone::VerdictKind::Stable) && it.rep["eps_norm"].get<double>() <= 0.01 + 1e-15) {
      for (std::size_t i = 1; i < it.traj.size(); ++i) {
        const double dt = it.traj[i][0] - it.traj[i - 1][0];
        const double ref = -dt * (it.traj[i][1] * it.traj[i][1] + it.traj[i - 1][1] * it.traj[i - 1][1]);
        const double dphi = it.traj[i][2] - it.traj[i - 1][2];
        if (ref == 0) continue;
        ++tot;
        const double q = dphi / ref;
        good += q >= 0.9 && q <= 1.1;
      }
    }
  }
  add("monotonicity", "max per-step increase of |nu| along trajectories", max_inc, "<= 1e-8", max_inc <= 1e-8);
  add("orbit_identity", "max |g^-1 . b0 - b|", max_orbit, "<= 1e-6", max_orbit <= 1e-6);
  const double frac = tot ? double(good) / tot : 0;
  add("donaldson_decrease", "fraction of steps with (dphi/dt)/(-2|nu|^2) in [0.9,1.1], stable runs |eps|<=0.01", frac,
      ">= 0.95", tot > 0 && frac >= 0.95, tot ? "" : "insufficient data: no qualifying steps");

  // outcomes against the cone predictions
  int n_stable = 0, ok_stable = 0, n_unstable = 0, ok_unstable = 0, ok_destab = 0;
  double worst_hym = 0, worst_lower = 0, worst_decay = 0;
  for (auto& it : items) {
    if (errored(it)) continue;
    const std::string pv = predicted(it);
    if (pv == cone::verdict_name(cone::VerdictKind::Stable)) {
      ++n_stable;
      const double hr = it.rep["hym_residual"].get<double>();
      worst_hym = std::max(worst_hym, hr);
      ok_stable += it.rep["outcome"] == "Converged" && hr <= sc.flow.tol_hym &&
                   it.rep["cond_g"].get<double>() < sc.flow.cond_max;
    } else if (pv == cone::verdict_name(cone::VerdictKind::Unstable)) {
      ++n_unstable;
      if (it.rep["outcome"] != "Destabilized" || !it.rep.contains("destabilizer")) continue;
      const json& D = it.rep["destabilizer"];
      const auto first = D["blocks"][0].get<std::vector<int>>();
      // the lowest eigenspace must be a violated wall's sub-bundle: same
      // components, same rank and same c1
      bool match = false;
      for (auto w : it.rep["predicted"]["walls"]) {
        const auto& cand = sc.candidates[w.get<std::size_t>()];
        auto comps = cand.components;
        std::sort(comps.begin(), comps.end());
        cone::QVec c1{0, 0};
        for (int i : first) {
          c1[0] += sc.bundle.flux[i].m2;
          c1[1] += sc.bundle.flux[i].m1;
        }
        match |= comps == first && int(first.size()) == cand.datum.rank && c1 == cand.datum.c1;
      }
      ok_unstable += match;
      const double lower = D["lower"].get<double>(), decay = D["decay"].get<double>();
      worst_lower = std::max(worst_lower, lower);
      worst_decay = std::max(worst_decay, decay);
      ok_destab += lower <= 1e-8 && decay < 0.1;
    }
  }
  add("stable_converged", "stable-side runs Converged with hym_residual <= tol_HYM and finite cond(g)", worst_hym,
      "all of " + std::to_string(n_stable), n_stable > 0 && ok_stable == n_stable,
      std::to_string(ok_stable) + "/" + std::to_string(n_stable));
  add("unstable_destabilized", "unstable-side runs Destabilized along the violated wall's sub-bundle", ok_unstable,
      "all of " + std::to_string(n_unstable), n_unstable > 0 && ok_unstable == n_unstable,
      std::to_string(ok_unstable) + "/" + std::to_string(n_unstable));
  add("destabilizer_decay", "max lower-triangular part / decay at probe time", worst_lower, "<= 1e-8, decay < 0.1",
      n_unstable > 0 && ok_destab == n_unstable, "max decay " + fmt(worst_decay));

  double worst_pair = 0;
  int n_pair = 0;
  for (auto& it : items) {
    if (errored(it)) continue;
    for (auto& p : it.rep["pairing"]) {
      const double lhs = p["lhs"].get<double>(), rhs = p["rhs"].get<double>();
      const double err = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-8);
      worst_pair = std::max(worst_pair, err);
      ++n_pair;
    }
  }
  add("pairing", "max relative |lhs - rhs| of the sub-bundle pairing", worst_pair, "<= 1e-4",
      n_pair > 0 && worst_pair <= 1e-4);

  // sweeps
  std::vector<flow::SweepPoint> exact, moduli;
  std::vector<std::pair<double, double>> block_norm;  // (scale, off-diagonal block norm)
  std::map<std::string, std::vector<const Item*>> lip;
  for (auto& it : items) {
    if (errored(it) || it.rep["outcome"] != "Converged") continue;
    flow::SweepPoint sp;
    const json& e = it.rep["eps"];
    sp.eps = {e["dt1"].get<double>(), e["dt2"].get<double>(), e["amp1"].get<double>(), e["amp2"].get<double>()};
    sp.b_norm = it.rep["b_norm"].get<double>();
    sp.nu_norm = it.rep["nu_norm"].get<double>();
    sp.dist = it.rep["dist"].get<double>();
    if (it.path->purpose == "lipschitz") {
      lip[it.path->name].push_back(&it);
      continue;
    }
    if (it.path->kind == "exact") exact.push_back(sp);
    if (it.path->kind == "moduli" && predicted(it) == cone::verdict_name(cone::VerdictKind::Stable)) {
      moduli.push_back(sp);
      const auto obs = it.rep["observables"].get<std::vector<double>>();
      const int r = sc.bundle.r;
      double off = 0;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          if (a != b) off += obs[9 + a * r + b] * obs[9 + a * r + b];
      block_norm.push_back({it.rep["scale"].get<double>(), std::sqrt(off)});
    }
  }
  try {
    const auto f = flow::bound_verify(exact, moduli);
    add("sweep_constant", "spread of |b|^2 / (|nu| + |eps|^2 + |[eps]|) across the sweep (single C)", f.C_spread,
        "<= 10", f.C_spread <= 10, "C = " + fmt(f.C_norm));
    add("exact_slope", "log-log slope of |dbar_eps - dbar_0| against |eps| on the exact path", f.exact_slope,
        "in [0.9, 1.1]", std::abs(f.exact_slope - 1) <= 0.1, "C = " + fmt(f.exact_C));
    add("moduli_slope", "log-log slope of |dbar_eps - dbar_0| against |[eps]| on the moduli path",
        f.moduli_slope, "<= 0.65", f.moduli_slope <= 0.65);
  } catch (const flow::InsufficientData& e) {
    for (const char* id : {"sweep_constant", "exact_slope", "moduli_slope"})
      add(id, "sweep bound", 0, ">= 4 converged points per path", false, std::string("insufficient data: ") + e.what());
  }

  // continuity: Lipschitz observables away from the wall, block norms -> 0 at the wall
  double lip_spread = 0, lip_max = 0;
  int lip_pairs = 0;
  for (auto& [name, pts] : lip) {
    std::vector<double> Ls;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto o1 = pts[i - 1]->rep["observables"].get<std::vector<double>>();
      const auto o2 = pts[i]->rep["observables"].get<std::vector<double>>();
      double d = 0;
      for (std::size_t q = 0; q < o1.size(); ++q) d += (o1[q] - o2[q]) * (o1[q] - o2[q]);
      const auto& e1 = pts[i - 1]->rep["eps"];
      const auto& e2 = pts[i]->rep["eps"];
      const double de = std::max(std::abs(e1["dt1"].get<double>() - e2["dt1"].get<double>()) +
                                     std::abs(e1["amp1"].get<double>() - e2["amp1"].get<double>()),
                                 std::abs(e1["dt2"].get<double>() - e2["dt2"].get<double>()) +
                                     std::abs(e1["amp2"].get<double>() - e2["amp2"].get<double>()));
      if (de > 0) Ls.push_back(std::sqrt(d) / de);
    }
    if (Ls.size() >= 2) {
      const auto [lo, hi] = std::minmax_element(Ls.begin(), Ls.end());
      lip_spread = std::max(lip_spread, *hi / *lo);
      lip_max = std::max(lip_max, *hi);
      lip_pairs += int(Ls.size());
    }
  }
  add("lipschitz", "spread of fitted Lipschitz ratios of observables along same-side paths", lip_spread,
      "<= 3", lip_pairs >= 2 && lip_spread <= 3, lip_pairs ? "L = " + fmt(lip_max) : "insufficient data");
  std::sort(block_norm.begin(), block_norm.end());
  bool decreasing = block_norm.size() >= 2;
  for (std::size_t i = 1; i < block_norm.size(); ++i) decreasing &= block_norm[i - 1].second < block_norm[i].second;
  double bn_slope = 0;
  if (block_norm.size() >= 2) {
    std::vector<double> x, y;
    for (auto& [s, n] : block_norm) {
      x.push_back(std::log(s));
      y.push_back(std::log(std::max(n, 1e-300)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i] / x.size();
      my += y[i] / y.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    bn_slope = sxy / sxx;
  }
  add("block_norms", "log-log slope of off-diagonal |gamma_ij| toward the wall (monotone decrease)", bn_slope,
      "> 0.25 and monotone", decreasing && bn_slope > 0.25);

  double s_max = 0, phi_min = 0;
  for (auto& it : items) {
    if (errored(it) || predicted(it) != cone::verdict_name(cone::VerdictKind::Stable)) continue;
    s_max = std::max(s_max, it.rep["max_s_norm"].get<double>());
    phi_min = std::min(phi_min, it.rep["min_phi"].get<double>());
  }
  add("simpson_monitor", "max |s| on stable runs (phi bounded below)", s_max, "finite",
      std::isfinite(s_max) && std::isfinite(phi_min), "min phi " + fmt(phi_min));
  return rows;
}

std::string verdicts_csv(const std::vector<VerdictRow>& rows) {
  std::string s = "id,measured,threshold,pass,note\n";
  for (auto& r : rows) s += r.id + "," + fmt(r.measured) + ",\"" + r.threshold + "\"," + (r.pass ? "pass" : "fail") + ",\"" + r.note + "\"\n";
  return s;
}

json verdicts_json(const std::vector<VerdictRow>& rows) {
  json a = json::array();
  for (auto& r : rows)
    a.push_back({{"id", r.id}, {"what", r.what}, {"measured", r.measured}, {"threshold", r.threshold},
                 {"pass", r.pass}, {"note", r.note}});
  return a;
}

}  // namespace hym::cli
