#include "hym/exact_lp.hpp"

#include <stdexcept>

namespace hym::lp {

namespace {

// Tableau simplex on rows T (m x (n+1)), last column rhs, basis[m].
// Objective row obj (size n+1). Returns false if unbounded.
bool run_simplex(std::vector<std::vector<Q>>& T, std::vector<Q>& obj,
                 std::vector<int>& basis, int ncols_allowed) {
  const int m = static_cast<int>(T.size());
  const int n = static_cast<int>(obj.size()) - 1;
  for (;;) {
    int enter = -1;
    for (int j = 0; j < ncols_allowed; ++j) {
      if (obj[j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    Q best;
    for (int i = 0; i < m; ++i) {
      if (T[i][enter] > 0) {
        Q ratio = T[i][n] / T[i][enter];
        if (leave < 0 || ratio < best ||
            (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) return false;
    Q piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave || T[i][enter] == 0) continue;
      Q f = T[i][enter];
      for (int j = 0; j <= n; ++j) T[i][j] -= f * T[leave][j];
    }
    if (obj[enter] != 0) {
      Q f = obj[enter];
      for (int j = 0; j <= n; ++j) obj[j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }
}

}  // namespace

Result minimize_standard(const std::vector<std::vector<Q>>& A,
                         const std::vector<Q>& b, const std::vector<Q>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  // phase I: artificials a_i, one per row
  const int N = n + m;
  std::vector<std::vector<Q>> T(m, std::vector<Q>(N + 1));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(A[i].size()) != n)
      throw std::invalid_argument("lp: row width mismatch");
    const bool flip = b[i] < 0;
    for (int j = 0; j < n; ++j) T[i][j] = flip ? Q(-A[i][j]) : A[i][j];
    T[i][n + i] = 1;
    T[i][N] = flip ? Q(-b[i]) : b[i];
    basis[i] = n + i;
  }
  std::vector<Q> obj(N + 1);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= N; ++j)
      if (j < n || j == N) obj[j] -= T[i][j];
  run_simplex(T, obj, basis, N);
  Result res;
  if (obj[N] != 0) {  // -sum(artificials) at optimum
    res.status = Status::Infeasible;
    return res;
  }
  // drive remaining artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j)
      if (T[i][j] != 0) {
        col = j;
        break;
      }
    if (col < 0) continue;  // redundant row
    Q piv = T[i][col];
    for (auto& v : T[i]) v /= piv;
    for (int k = 0; k < m; ++k) {
      if (k == i || T[k][col] == 0) continue;
      Q f = T[k][col];
      for (int j = 0; j <= N; ++j) T[k][j] -= f * T[i][j];
    }
    basis[i] = col;
  }
  // phase II over original columns; artificial columns frozen out
  std::vector<Q> obj2(N + 1);
  for (int j = 0; j < n; ++j) obj2[j] = c[j];
  for (int i = 0; i < m; ++i) {
    int bj = basis[i];
    if (bj < n && obj2[bj] != 0) {
      Q f = obj2[bj];
      for (int j = 0; j <= N; ++j) obj2[j] -= f * T[i][j];
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = n; j < N; ++j)
      if (basis[i] != j) T[i][j] = 0;
  if (!run_simplex(T, obj2, basis, n)) {
    res.status = Status::Unbounded;
    return res;
  }
  res.status = Status::Optimal;
  res.x.assign(n, Q(0));
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = T[i][N];
  res.value = 0;
  for (int j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

int Problem::add_var(bool nonneg, Q upper, bool has_upper) {
  vars_.push_back({nonneg, has_upper, upper});
  return static_cast<int>(vars_.size()) - 1;
}

void Problem::add_le(const std::vector<std::pair<int, Q>>& row, Q rhs) {
  rows_.push_back({row, -1, rhs});
}
void Problem::add_ge(const std::vector<std::pair<int, Q>>& row, Q rhs) {
  rows_.push_back({row, +1, rhs});
}
void Problem::add_eq(const std::vector<std::pair<int, Q>>& row, Q rhs) {
  rows_.push_back({row, 0, rhs});
}

Result Problem::maximize(const std::vector<std::pair<int, Q>>& obj) const {
  std::vector<std::pair<int, Q>> neg;
  for (auto& [j, v] : obj) neg.emplace_back(j, -v);
  Result r = minimize(neg);
  if (r.status == Status::Optimal) r.value = -r.value;
  return r;
}

Result Problem::minimize(const std::vector<std::pair<int, Q>>& obj) const {
  // map user vars to standard columns: free var -> (p, q)
  const int nv = num_vars();
  std::vector<int> pos(nv), negc(nv, -1);
  int col = 0;
  for (int i = 0; i < nv; ++i) {
    pos[i] = col++;
    if (!vars_[i].nonneg) negc[i] = col++;
  }
  struct StdRow {
    std::vector<std::pair<int, Q>> coef;
    int sense;
    Q rhs;
  };
  std::vector<StdRow> rows;
  auto expand = [&](const std::vector<std::pair<int, Q>>& r) {
    std::vector<std::pair<int, Q>> out;
    for (auto& [j, v] : r) {
      out.emplace_back(pos[j], v);
      if (negc[j] >= 0) out.emplace_back(negc[j], -v);
    }
    return out;
  };
  for (auto& r : rows_) rows.push_back({expand(r.coef), r.sense, r.rhs});
  for (int i = 0; i < nv; ++i)
    if (vars_[i].has_upper) rows.push_back({expand({{i, Q(1)}}), -1, vars_[i].upper});
  int nslack = 0;
  for (auto& r : rows)
    if (r.sense != 0) ++nslack;
  const int n = col + nslack;
  std::vector<std::vector<Q>> A(rows.size(), std::vector<Q>(n));
  std::vector<Q> b(rows.size());
  int s = col;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (auto& [j, v] : rows[i].coef) A[i][j] += v;
    if (rows[i].sense == -1) A[i][s++] = 1;
    if (rows[i].sense == +1) A[i][s++] = -1;
    b[i] = rows[i].rhs;
  }
  std::vector<Q> c(n);
  for (auto& [j, v] : obj) {
    c[pos[j]] += v;
    if (negc[j] >= 0) c[negc[j]] -= v;
  }
  Result sr = minimize_standard(A, b, c);
  Result r;
  r.status = sr.status;
  if (sr.status != Status::Optimal) return r;
  r.x.assign(nv, Q(0));
  for (int i = 0; i < nv; ++i) {
    r.x[i] = sr.x[pos[i]];
    if (negc[i] >= 0) r.x[i] -= sr.x[negc[i]];
  }
  r.value = sr.value;
  return r;
}

}  // namespace hym::lp
