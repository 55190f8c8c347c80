#include "hym/cone.hpp"

#include <algorithm>
#include <map>

#include "hym/exact_lp.hpp"

namespace hym::cone {

Q parse_rational(const std::string& s) {
  Q q;
  if (q.set_str(s, 10) != 0) throw StructuralError("not a rational: " + s);
  q.canonicalize();
  if (q.get_den() == 0) throw StructuralError("zero denominator: " + s);
  return q;
}

std::string to_string(const Q& q) { return q.get_str(); }

const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Stable: return "stable";
    case VerdictKind::Semistable: return "semistable";
    case VerdictKind::Unstable: return "unstable";
  }
  return "?";
}

std::size_t Region::dim() const {
  return vertices.empty() ? 0 : vertices.front().coords.size();
}

Q dot(const QVec& a, const QVec& b) {
  if (a.size() != b.size()) throw StructuralError("dimension mismatch");
  Q s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Q slope(const SlopeDatum& s, const ThetaClass& th) {
  if (s.rank < 1) throw StructuralError("rank must be positive");
  return dot(s.c1, th.coords) / s.rank;
}

WallFunctional wall_functional(const SlopeDatum& sub, const SlopeDatum& total) {
  if (sub.rank <= 0 || sub.rank >= total.rank)
    throw DomainError("subobject rank out of range");
  if (sub.c1.size() != total.c1.size()) throw StructuralError("dimension mismatch");
  WallFunctional w;
  w.source = sub;
  w.coeffs.resize(sub.c1.size());
  bool zero = true;
  for (std::size_t i = 0; i < sub.c1.size(); ++i) {
    w.coeffs[i] = (total.c1[i] - sub.c1[i]) / (total.rank - sub.rank) -
                  sub.c1[i] / sub.rank;
    if (w.coeffs[i] != 0) zero = false;
  }
  w.zero = zero;
  return w;
}

Q evaluate(const WallFunctional& w, const ThetaClass& th) {
  return dot(w.coeffs, th.coords);
}

namespace {

void check_region(const Region& K) {
  if (K.vertices.empty()) throw DomainError("empty region");
  const auto d = K.dim();
  for (auto& v : K.vertices)
    if (v.coords.size() != d) throw StructuralError("region vertex dimension mismatch");
}

// slope values of each datum at each vertex
std::vector<QVec> vertex_values(const std::vector<SlopeDatum>& D, const Region& K) {
  std::vector<QVec> val(D.size(), QVec(K.vertices.size()));
  for (std::size_t i = 0; i < D.size(); ++i)
    for (std::size_t k = 0; k < K.vertices.size(); ++k)
      val[i][k] = slope(D[i], K.vertices[k]);
  return val;
}

// max over x in the simplex of min_r (A x)_r. A has one short row per
// region vertex, so this is the small side of the game's LP duality.
Q maxmin(const std::vector<QVec>& A) {
  const std::size_t q = A.front().size();
  lp::Problem P;
  std::vector<int> x;
  for (std::size_t j = 0; j < q; ++j) x.push_back(P.add_var());
  int w = P.add_var(false);
  std::vector<std::pair<int, Q>> sum;
  for (int v : x) sum.emplace_back(v, Q(1));
  P.add_eq(sum, Q(1));
  for (auto& row : A) {
    std::vector<std::pair<int, Q>> c{{w, Q(-1)}};
    for (std::size_t j = 0; j < q; ++j)
      if (row[j] != 0) c.emplace_back(x[j], row[j]);
    P.add_ge(c, Q(0));
  }
  auto r = P.maximize({{w, Q(1)}});
  if (r.status != lp::Status::Optimal) throw DomainError("min-max LP failed");
  return r.value;
}

}  // namespace

Q min_max_slope(const std::vector<SlopeDatum>& D, const Region& K) {
  if (D.empty()) throw DomainError("empty candidate set");
  check_region(K);
  auto val = vertex_values(D, K);
  // min over K of max_i s_i = max over mixtures of D of min over vertices
  std::vector<QVec> A(K.vertices.size(), QVec(D.size()));
  for (std::size_t i = 0; i < D.size(); ++i)
    for (std::size_t k = 0; k < K.vertices.size(); ++k) A[k][i] = val[i][k];
  return maxmin(A);
}

std::vector<std::size_t> finite_reduction(const std::vector<SlopeDatum>& D,
                                          const Region& K) {
  if (D.empty()) throw DomainError("empty candidate set");
  const Q a = min_max_slope(D, K);
  auto val = vertex_values(D, K);

  // F_{K,a}: some vertex (hence some point of K) reaches a
  std::vector<std::size_t> Fka;
  for (std::size_t i = 0; i < D.size(); ++i) {
    Q mx = *std::max_element(val[i].begin(), val[i].end());
    if (mx >= a) Fka.push_back(i);
  }
  // functionals that agree on every vertex agree on K; keep the lowest index
  std::map<QVec, std::size_t> first;
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < D.size(); ++i) {
    auto [it, fresh] = first.emplace(val[i], i);
    if (fresh) reps.push_back(i);
  }
  std::vector<std::size_t> F;
  for (std::size_t i : Fka) {
    if (first[val[i]] != i) continue;
    // cheap exact shortcuts before the LP; both are decided on vertices
    // since every s_i - s_j is affine on K
    bool vertex_max = false, dominated = false;
    std::vector<std::size_t> rel;
    for (std::size_t k = 0; k < K.vertices.size() && !vertex_max; ++k) {
      bool strict = true;
      for (std::size_t j : reps)
        if (j != i && val[j][k] >= val[i][k]) {
          strict = false;
          break;
        }
      vertex_max = strict;
    }
    if (vertex_max) {
      F.push_back(i);
      continue;
    }
    for (std::size_t j : reps) {
      if (j == i) continue;
      bool above = true, below = true;
      for (std::size_t k = 0; k < K.vertices.size(); ++k) {
        above &= val[j][k] > val[i][k];
        below &= val[j][k] < val[i][k];
      }
      dominated |= above;
      // s_j < s_i on all of K never decides the sign of the optimum
      if (!below) rel.push_back(j);
    }
    if (dominated) continue;
    if (rel.empty()) {
      F.push_back(i);
      continue;
    }
    // strict maximizer somewhere in K: max over K of min_j (s_i - s_j) > 0,
    // i.e. by duality every mixture of the s_j - s_i is negative at some vertex
    std::vector<QVec> A(K.vertices.size(), QVec(rel.size()));
    for (std::size_t n = 0; n < rel.size(); ++n)
      for (std::size_t k = 0; k < K.vertices.size(); ++k) A[k][n] = val[rel[n]][k] - val[i][k];
    if (maxmin(A) < 0) F.push_back(i);
  }
  return F;
}

StabilityCone build_cones(const SlopeDatum& total, const std::vector<SlopeDatum>& D,
                          const Region& K) {
  if (D.empty()) throw DomainError("empty candidate set");
  check_region(K);
  for (auto& s : D)
    if (s.rank <= 0 || s.rank >= total.rank)
      throw DomainError("candidate rank out of range");
  // mu(S) <= mu(E) for all S  <=>  max over D of slope <= slope(total); the
  // finite reduction is applied to the slope vectors c1/rk themselves
  StabilityCone C;
  C.total = total;
  C.region = K;
  auto F = finite_reduction(D, K);
  std::vector<QVec> seen;
  for (std::size_t i : F) {
    auto w = wall_functional(D[i], total);
    w.source_index = i;
    // duplicate-free up to positive scaling
    bool dup = false;
    for (auto& s : seen) {
      Q ratio = 0;
      bool same = true;
      for (std::size_t k = 0; k < s.size() && same; ++k) {
        if (s[k] == 0 && w.coeffs[k] == 0) continue;
        if (s[k] == 0 || w.coeffs[k] == 0) {
          same = false;
          break;
        }
        Q q = w.coeffs[k] / s[k];
        if (ratio == 0) ratio = q;
        else if (q != ratio) same = false;
      }
      if (same && (ratio > 0 || (w.zero && std::all_of(s.begin(), s.end(), [](const Q& x) { return x == 0; })))) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    seen.push_back(w.coeffs);
    if (w.zero) C.empty_stable = true;
    C.walls.push_back(std::move(w));
  }
  return C;
}

bool in_region(const ThetaClass& th, const Region& K) {
  check_region(K);
  if (th.coords.size() != K.dim()) throw StructuralError("dimension mismatch");
  lp::Problem P;
  std::vector<int> lam;
  for (std::size_t k = 0; k < K.vertices.size(); ++k) lam.push_back(P.add_var());
  std::vector<std::pair<int, Q>> sum;
  for (int l : lam) sum.emplace_back(l, Q(1));
  P.add_eq(sum, Q(1));
  for (std::size_t d = 0; d < K.dim(); ++d) {
    std::vector<std::pair<int, Q>> row;
    for (std::size_t k = 0; k < lam.size(); ++k)
      row.emplace_back(lam[k], K.vertices[k].coords[d]);
    P.add_eq(row, th.coords[d]);
  }
  return P.minimize({}).status == lp::Status::Optimal;
}

bool in_region_cone(const ThetaClass& th, const Region& K) {
  check_region(K);
  if (th.coords.size() != K.dim()) throw StructuralError("dimension mismatch");
  // theta = sum mu_k V_k with mu >= 0, sum mu > 0
  lp::Problem P;
  std::vector<int> mu;
  for (std::size_t k = 0; k < K.vertices.size(); ++k) mu.push_back(P.add_var());
  for (std::size_t d = 0; d < K.dim(); ++d) {
    std::vector<std::pair<int, Q>> row;
    for (std::size_t k = 0; k < mu.size(); ++k)
      row.emplace_back(mu[k], K.vertices[k].coords[d]);
    P.add_eq(row, th.coords[d]);
  }
  std::vector<std::pair<int, Q>> sum;
  for (int m : mu) sum.emplace_back(m, Q(1));
  auto r = P.maximize(sum);
  if (r.status == lp::Status::Unbounded) return true;
  return r.status == lp::Status::Optimal && r.value > 0;
}

Verdict classify(const ThetaClass& th, const StabilityCone& cone) {
  if (!in_region_cone(th, cone.region)) throw DomainError("theta outside region");
  Verdict v;
  std::vector<std::size_t> zero, neg;
  for (std::size_t i = 0; i < cone.walls.size(); ++i) {
    Q val = evaluate(cone.walls[i], th);
    if (val < 0) neg.push_back(i);
    else if (val == 0) zero.push_back(i);
  }
  if (!neg.empty()) {
    v.kind = VerdictKind::Unstable;
    v.walls = neg;
  } else if (!zero.empty()) {
    v.kind = VerdictKind::Semistable;
    v.walls = zero;
  }
  return v;
}

std::size_t rank(std::vector<QVec> rows) {
  std::size_t r = 0;
  if (rows.empty()) return 0;
  const std::size_t ncol = rows.front().size();
  for (std::size_t c = 0; c < ncol && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Q f = rows[i][c] / rows[r][c];
      for (std::size_t k = c; k < ncol; ++k) rows[i][k] -= f * rows[r][k];
    }
    ++r;
  }
  return r;
}

namespace {

// dimension of {x in aff(K) : w(x) = 0 for w in active}; -1 if empty
int affine_section_dim(const Region& K, const std::vector<const WallFunctional*>& active) {
  const auto& V0 = K.vertices.front().coords;
  std::vector<QVec> dirs;
  for (std::size_t k = 1; k < K.vertices.size(); ++k) {
    QVec d(V0.size());
    for (std::size_t i = 0; i < V0.size(); ++i) d[i] = K.vertices[k].coords[i] - V0[i];
    dirs.push_back(d);
  }
  // basis of span(dirs)
  std::vector<QVec> basis;
  for (auto& d : dirs) {
    auto trial = basis;
    trial.push_back(d);
    if (rank(trial) > basis.size()) basis.push_back(d);
  }
  // constraints on coefficients mu: sum_j mu_j w(B_j) = -w(V0)
  std::vector<QVec> M, aug;
  for (auto* w : active) {
    QVec row, arow;
    for (auto& b : basis) row.push_back(dot(w->coeffs, b));
    arow = row;
    arow.push_back(-dot(w->coeffs, V0));
    M.push_back(row);
    aug.push_back(arow);
  }
  if (basis.empty()) {
    for (auto& a : aug)
      if (a.back() != 0) return -1;
    return 0;
  }
  std::size_t rM = M.empty() ? 0 : rank(M);
  std::size_t rA = aug.empty() ? 0 : rank(aug);
  if (rA != rM) return -1;
  return static_cast<int>(basis.size() - rM);
}

}  // namespace

Face face_of(const ThetaClass& th, const StabilityCone& cone) {
  auto v = classify(th, cone);
  if (v.kind == VerdictKind::Unstable) throw DomainError("unstable class has no face");
  Face f;
  if (v.kind == VerdictKind::Semistable) f.active = v.walls;
  std::vector<const WallFunctional*> act;
  for (auto i : f.active) act.push_back(&cone.walls[i]);
  int d = affine_section_dim(cone.region, act);
  if (d < 0) {
    // theta lies on the cone over K but its wall section misses aff(K);
    // fall back to the linear span of the cone
    std::vector<QVec> span;
    for (auto& vx : cone.region.vertices) span.push_back(vx.coords);
    std::vector<QVec> both = span;
    std::size_t rs = rank(span);
    for (auto* w : act) both.push_back(w->coeffs);
    d = static_cast<int>(rs) - static_cast<int>(rank(both) - rs);
  }
  f.dim = d;
  return f;
}

bool graded_refines(const Face& f1, const Face& f2) {
  return std::includes(f1.active.begin(), f1.active.end(), f2.active.begin(),
                       f2.active.end());
}

std::vector<Face> face_lattice(const StabilityCone& cone, std::size_t max_walls) {
  std::vector<Face> out;
  const std::size_t m = cone.walls.size();
  if (m > max_walls) return out;
  const auto& K = cone.region;
  for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
    lp::Problem P;
    std::vector<int> lam;
    for (std::size_t k = 0; k < K.vertices.size(); ++k) lam.push_back(P.add_var());
    int delta = P.add_var(false, Q(1), true);
    std::vector<std::pair<int, Q>> sum;
    for (int l : lam) sum.emplace_back(l, Q(1));
    P.add_eq(sum, Q(1));
    std::vector<const WallFunctional*> act;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::pair<int, Q>> row;
      for (std::size_t k = 0; k < lam.size(); ++k)
        row.emplace_back(lam[k], evaluate(cone.walls[i], K.vertices[k]));
      if (mask & (std::size_t(1) << i)) {
        P.add_eq(row, Q(0));
        act.push_back(&cone.walls[i]);
      } else {
        row.emplace_back(delta, Q(-1));
        P.add_ge(row, Q(0));
      }
    }
    auto r = P.maximize({{delta, Q(1)}});
    if (r.status != lp::Status::Optimal || r.value <= 0) continue;
    Face f;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (std::size_t(1) << i)) f.active.push_back(i);
    f.dim = affine_section_dim(K, act);
    out.push_back(f);
  }
  return out;
}

}  // namespace hym::cone
