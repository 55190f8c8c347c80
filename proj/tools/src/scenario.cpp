#include "hym/cli/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hym::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("scenario: " + where + ": " + what);
}

const json& need(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

cone::Q rational(const json& j, const std::string& where) {
  if (j.is_number_integer()) return cone::Q(j.get<long>());
  if (j.is_string()) {
    try {
      return cone::parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  fail(where, "expected an integer or a \"p/q\" string");
}

cone::QVec qvec(const json& j, const std::string& where, std::size_t dim) {
  if (!j.is_array()) fail(where, "expected an array");
  if (j.size() != dim) fail(where, "expected " + std::to_string(dim) + " entries");
  cone::QVec v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(rational(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

template <class T>
void opt(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const std::string w = where + "." + key;
  if constexpr (std::is_same_v<T, int>) out = integer(*it, w);
  else if constexpr (std::is_same_v<T, double>) out = num(*it, w);
  else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) fail(w, "expected a string");
    out = it->get<std::string>();
  }
}

cone::Q exact(double x) {
  mpq_class q(x);  // exact binary value
  return q;
}

}  // namespace

cone::ThetaClass Scenario::theta0() const { return {{exact(grid.t1), exact(grid.t2)}}; }

cone::ThetaClass Scenario::theta(const Perturbation& e) const {
  return {{exact(grid.t1) + exact(e.dt1), exact(grid.t2) + exact(e.dt2)}};
}

Perturbation Scenario::perturbation(const EpsPath& p, double s) const {
  Perturbation e;
  if (p.kind != "exact") {
    e.dt1 = s * p.direction[0];
    e.dt2 = s * p.direction[1];
  }
  if (p.kind != "moduli") {
    e.amp1 = s * p.amplitude[0];
    e.amp2 = s * p.amplitude[1];
  }
  return e;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: malformed JSON: ") + e.what());
  }
  Scenario S;
  if (!j.is_object()) fail("<root>", "expected an object");
  opt(j, "name", S.name, "<root>");
  const int dim = j.contains("ambient_dim") ? integer(j["ambient_dim"], "ambient_dim") : 2;
  if (dim != 2) fail("ambient_dim", "the lattice backend supports the 2-dimensional class space only");

  const json& g = need(j, "geometry", "<root>");
  S.grid.N = integer(need(g, "N", "geometry"), "geometry.N");
  S.grid.t1 = num(need(g, "t1", "geometry"), "geometry.t1");
  S.grid.t2 = num(need(g, "t2", "geometry"), "geometry.t2");
  try {
    S.grid.validate();
  } catch (const ConfigError& e) {
    fail("geometry", e.what());
  }

  const json& b = need(j, "bundle", "<root>");
  S.bundle.r = integer(need(b, "rank", "bundle"), "bundle.rank");
  const json& fl = need(b, "fluxes", "bundle");
  if (!fl.is_array()) fail("bundle.fluxes", "expected an array of [m1, m2]");
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const std::string w = "bundle.fluxes[" + std::to_string(i) + "]";
    if (!fl[i].is_array() || fl[i].size() != 2) fail(w, "expected [m1, m2]");
    S.bundle.flux.push_back({integer(fl[i][0], w), integer(fl[i][1], w)});
  }
  if (b.contains("extension")) {
    S.bundle.ext.assign(S.bundle.r, std::vector<bool>(S.bundle.r, false));
    const json& ex = b["extension"];
    if (!ex.is_array()) fail("bundle.extension", "expected a list of [i, j] blocks");
    for (std::size_t k = 0; k < ex.size(); ++k) {
      const std::string w = "bundle.extension[" + std::to_string(k) + "]";
      if (!ex[k].is_array() || ex[k].size() != 2) fail(w, "expected [i, j]");
      const int i = integer(ex[k][0], w), jj = integer(ex[k][1], w);
      if (i < 0 || jj < 0 || i >= S.bundle.r || jj >= S.bundle.r) fail(w, "component out of range");
      S.bundle.ext[i][jj] = true;
    }
  }
  try {
    S.bundle.validate();
  } catch (const ConfigError& e) {
    fail("bundle", e.what());
  }

  if (j.contains("total")) {
    S.total.c1 = qvec(need(j["total"], "c1", "total"), "total.c1", 2);
    S.total.rank = integer(need(j["total"], "rank", "total"), "total.rank");
  } else {
    S.total.rank = S.bundle.r;
    S.total.c1 = {0, 0};
    for (auto& f : S.bundle.flux) {
      S.total.c1[0] += f.m2;
      S.total.c1[1] += f.m1;
    }
  }
  if (S.total.rank != S.bundle.r) fail("total.rank", "must equal bundle.rank");

  const json& cands = need(j, "candidates", "<root>");
  if (!cands.is_array() || cands.empty()) fail("candidates", "need a nonempty list");
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const std::string w = "candidates[" + std::to_string(k) + "]";
    Candidate c;
    c.datum.c1 = qvec(need(cands[k], "c1", w), w + ".c1", 2);
    c.datum.rank = integer(need(cands[k], "rank", w), w + ".rank");
    opt(cands[k], "tag", c.tag, w);
    if (cands[k].contains("components")) {
      const json& cc = cands[k]["components"];
      if (!cc.is_array()) fail(w + ".components", "expected an array");
      cone::QVec sum{0, 0};
      for (auto& x : cc) {
        const int i = integer(x, w + ".components");
        if (i < 0 || i >= S.bundle.r) fail(w + ".components", "component " + std::to_string(i) + " out of range");
        c.components.push_back(i);
        sum[0] += S.bundle.flux[i].m2;
        sum[1] += S.bundle.flux[i].m1;
      }
      if (int(c.components.size()) != c.datum.rank)
        fail(w + ".components", "rank does not match the number of components");
      if (sum != c.datum.c1) fail(w + ".components", "c1 does not match the fluxes of the listed components");
    }
    S.candidates.push_back(std::move(c));
  }

  const json& reg = need(need(j, "region", "<root>"), "vertices", "region");
  if (!reg.is_array() || reg.empty()) fail("region.vertices", "need a nonempty list");
  for (std::size_t k = 0; k < reg.size(); ++k)
    S.region.vertices.push_back({qvec(reg[k], "region.vertices[" + std::to_string(k) + "]", 2)});

  if (j.contains("probes"))
    for (std::size_t k = 0; k < j["probes"].size(); ++k)
      S.probes.push_back({qvec(j["probes"][k], "probes[" + std::to_string(k) + "]", 2)});

  if (j.contains("slice")) {
    const json& s = j["slice"];
    opt(s, "tau_V", S.tau_V, "slice");
    opt(s, "tau_K", S.tau_K, "slice");
    opt(s, "tol_sigma", S.slice.tol_sigma, "slice");
    opt(s, "ball_radius", S.slice.ball_radius, "slice");
    opt(s, "eps_radius", S.slice.eps_radius, "slice");
    opt(s, "max_chord", S.slice.max_chord, "slice");
    opt(s, "max_newton", S.slice.max_newton, "slice");
  }
  if (j.contains("flow")) {
    const json& f = j["flow"];
    opt(f, "tol_nu", S.flow.tol_nu, "flow");
    opt(f, "tol_hym", S.flow.tol_hym, "flow");
    opt(f, "rtol", S.flow.rtol, "flow");
    opt(f, "h0", S.flow.h0, "flow");
    opt(f, "h_max", S.flow.h_max, "flow");
    opt(f, "t_max", S.flow.t_max, "flow");
    opt(f, "max_steps", S.flow.max_steps, "flow");
    opt(f, "mono_slack", S.flow.mono_slack, "flow");
    opt(f, "destab_ratio", S.flow.destab_ratio, "flow");
    opt(f, "cond_max", S.flow.cond_max, "flow");
  }
  if (j.contains("b0")) {
    const json& b0 = j["b0"];
    if (b0.contains("block")) {
      const json& bl = b0["block"];
      if (!bl.is_array() || bl.size() != 2) fail("b0.block", "expected [i, j]");
      S.b0_block_i = integer(bl[0], "b0.block");
      S.b0_block_j = integer(bl[1], "b0.block");
    }
    opt(b0, "amplitude", S.b0_amplitude, "b0");
  }
  if (S.b0_block_i < 0 || S.b0_block_j < 0 || S.b0_block_i >= S.bundle.r || S.b0_block_j >= S.bundle.r)
    fail("b0.block", "component out of range");

  if (j.contains("epsilon_paths")) {
    const json& ps = j["epsilon_paths"];
    if (!ps.is_array()) fail("epsilon_paths", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string w = "epsilon_paths[" + std::to_string(k) + "]";
      const json& p = ps[k];
      EpsPath e;
      e.name = "path" + std::to_string(k);
      opt(p, "name", e.name, w);
      opt(p, "kind", e.kind, w);
      opt(p, "purpose", e.purpose, w);
      if (e.kind != "exact" && e.kind != "moduli" && e.kind != "mixed") fail(w + ".kind", "expected exact | moduli | mixed");
      if (e.purpose != "sweep" && e.purpose != "lipschitz") fail(w + ".purpose", "expected sweep | lipschitz");
      if (p.contains("direction")) {
        if (!p["direction"].is_array() || p["direction"].size() != 2) fail(w + ".direction", "expected [d1, d2]");
        e.direction = {num(p["direction"][0], w + ".direction"), num(p["direction"][1], w + ".direction")};
      }
      if (p.contains("amplitude")) {
        if (!p["amplitude"].is_array() || p["amplitude"].size() != 2) fail(w + ".amplitude", "expected [a1, a2]");
        e.amplitude = {num(p["amplitude"][0], w + ".amplitude"), num(p["amplitude"][1], w + ".amplitude")};
      }
      if (p.contains("scales")) {
        if (!p["scales"].is_array()) fail(w + ".scales", "expected an array");
        for (auto& x : p["scales"]) e.scales.push_back(num(x, w + ".scales"));
      } else {
        double start = 0.02, decay = 0.5;
        int count = 4;
        opt(p, "start", start, w);
        opt(p, "decay", decay, w);
        opt(p, "count", count, w);
        if (count < 0) fail(w + ".count", "must be nonnegative");
        if (!(decay > 0 && decay < 1)) fail(w + ".decay", "must lie in (0, 1)");
        for (int q = 0; q < count; ++q) e.scales.push_back(start * std::pow(decay, q));
      }
      if (p.contains("b0_amplitude")) {
        e.has_b0 = true;
        e.b0_amplitude = num(p["b0_amplitude"], w + ".b0_amplitude");
      }
      S.paths.push_back(std::move(e));
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    S.seed = j["seed"].get<std::uint64_t>();
  }
  return S;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace hym::cli
