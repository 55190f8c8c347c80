#include "hym/factor.hpp"

#include <cmath>

namespace hym {

namespace {
Eig eig(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}
}  // namespace

std::complex<double> FactorOps::ux(int, int y) const {
  return std::polar(1.0, 2 * M_PI * m * y / double(N * N));
}

std::complex<double> FactorOps::uy(int x, int y) const {
  if (y != N - 1) return 1.0;
  return std::polar(1.0, -2 * M_PI * m * x / double(N));
}

double FactorOps::plaquette_angle(int x, int y) const {
  const int xp = (x + 1) % N, yp = (y + 1) % N;
  auto w = ux(x, y) * uy(xp, y) * std::conj(ux(x, yp)) * std::conj(uy(x, y));
  return std::arg(w);
}

FactorOps::FactorOps(int n, int flux) : N(n), m(flux), a(1.0 / n) {
  const int n2 = N * N;
  Dx = Mat::Zero(n2, n2);
  Dy = Mat::Zero(n2, n2);
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      const int p = x * N + y;
      Dx(p, ((x + 1) % N) * N + y) += ux(x, y) / a;
      Dx(p, p) -= 1.0 / a;
      Dy(p, x * N + (y + 1) % N) += uy(x, y) / a;
      Dy(p, p) -= 1.0 / a;
    }
  const cd I(0, 1);
  dbF = 0.5 * (Dx + I * Dy);
  dF = 0.5 * (Dx - I * Dy);
  dbB = -dF.adjoint();
  dB = -dbF.adjoint();
  P = 0.5 * (dbF * dbF.adjoint() + dbB * dbB.adjoint());
  Q = 0.5 * (dbF.adjoint() * dbF + dbB.adjoint() * dbB);
  Lap = 0.5 * (Dx.adjoint() * Dx + Dy.adjoint() * Dy);
  eP = eig(P);
  eQ = eig(Q);
  eLap = eig(Lap);
}

const FactorOps& FactorCache::get(int m) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = ops_.find(m);
  if (it == ops_.end()) it = ops_.emplace(m, std::make_unique<FactorOps>(N_, m)).first;
  return *it->second;
}

}  // namespace hym
