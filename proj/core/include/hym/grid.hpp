#pragma once
// Product torus (C/(Z+iZ))^2 sampled on an N^4 grid, flux line bundles,
// and the metric perturbations used by the slice and the flow.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hym {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SolverError : std::runtime_error {
  double residual = 0;
  SolverError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

struct TorusGrid {
  int N = 8;
  double t1 = 1, t2 = 1;

  TorusGrid() = default;
  TorusGrid(int n, double a1, double a2) : N(n), t1(a1), t2(a2) { validate(); }
  void validate() const {
    if (N < 4 || N % 2) throw ConfigError("grid: N must be even and >= 4");
    if (!(t1 > 0 && t2 > 0)) throw ConfigError("grid: moduli must be positive");
  }
  int n2() const { return N * N; }       // sites per factor
  long sites() const { return long(n2()) * n2(); }
  double a() const { return 1.0 / N; }
  double vol() const { return t1 * t2; }
  double cell() const { return std::pow(a(), 4); }
};

struct Flux {
  int m1 = 0, m2 = 0;  // degree through factor 1, factor 2
  bool operator==(const Flux&) const = default;
};

struct BundleSpec {
  int r = 1;
  std::vector<Flux> flux;             // one per line component
  std::vector<std::vector<bool>> ext;  // strictly upper mask, r x r

  void validate() const {
    if (r < 1 || int(flux.size()) != r) throw ConfigError("bundle: need one flux pair per component");
    if (!ext.empty()) {
      if (int(ext.size()) != r) throw ConfigError("bundle: extension mask must be r x r");
      for (int i = 0; i < r; ++i) {
        if (int(ext[i].size()) != r) throw ConfigError("bundle: extension mask must be r x r");
        for (int j = 0; j <= i; ++j)
          if (ext[i][j]) throw ConfigError("bundle: extension mask must be strictly upper triangular");
      }
    }
  }
  Flux hom(int i, int j) const { return {flux[i].m1 - flux[j].m1, flux[i].m2 - flux[j].m2}; }
};

// Kaehler form t1(x1) dA1 + t2(x2) dA2. The constant shifts move the class,
// the cosine parts are exact (zero mean).
struct Perturbation {
  double dt1 = 0, dt2 = 0;
  double amp1 = 0, amp2 = 0;

  double c0_norm() const { return std::max(std::abs(dt1) + std::abs(amp1), std::abs(dt2) + std::abs(amp2)); }
  double class_norm() const { return std::abs(dt1) + std::abs(dt2); }
  bool is_zero() const { return dt1 == 0 && dt2 == 0 && amp1 == 0 && amp2 == 0; }
};

// Pointwise metric data, stored per factor site so that site (p1,p2) has
// t1(p1), t2(p2).
struct Metric {
  Eigen::VectorXd t1, t2;  // length N^2 each
  double T1 = 1, T2 = 1;   // class moduli (means)

  static Metric make(const TorusGrid& g, const Perturbation& e = {}) {
    Metric m;
    const int N = g.N;
    m.T1 = g.t1 + e.dt1;
    m.T2 = g.t2 + e.dt2;
    if (!(m.T1 > 0 && m.T2 > 0)) throw ConfigError("perturbation leaves the Kaehler cone");
    m.t1.resize(g.n2());
    m.t2.resize(g.n2());
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y) {
        const double c = std::cos(2 * M_PI * x / N);
        m.t1[x * N + y] = m.T1 + e.amp1 * c;
        m.t2[x * N + y] = m.T2 + e.amp2 * c;
      }
    if (m.t1.minCoeff() <= 0 || m.t2.minCoeff() <= 0) throw ConfigError("perturbation not positive");
    return m;
  }
  // Vol density t1 t2 as an N^2 x N^2 array
  Eigen::MatrixXd vol() const { return t1 * t2.transpose(); }
  // form weights 2/t_k times the volume density
  Eigen::MatrixXd wvol(int k) const {
    const long n = t1.size();
    return k == 0 ? Eigen::MatrixXd(2.0 * Eigen::VectorXd::Ones(n) * t2.transpose())
                  : Eigen::MatrixXd(2.0 * t1 * Eigen::VectorXd::Ones(n).transpose());
  }
};

}  // namespace hym
