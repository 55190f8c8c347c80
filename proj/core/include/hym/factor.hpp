#pragma once
// Covariant difference operators on one N x N torus factor carrying a U(1)
// flux m. Site p = x*N + y. Links transport from x+mu back to x:
//   Ux(x,y) = exp(2 pi i m y / N^2),   Uy(x,y) = 1 except on y = N-1 where
//   Uy(x,N-1) = exp(-2 pi i m x / N).
// Every plaquette then carries the angle -2 pi m / N^2 and the total is -2 pi m.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <map>
#include <memory>
#include <mutex>

#include "hym/field.hpp"

namespace hym {

struct Eig {
  Eigen::VectorXd val;
  Mat vec;
};

struct FactorOps {
  int N = 0;
  int m = 0;
  double a = 0;
  Mat Dx, Dy;         // forward covariant differences
  Mat dbF, dF;        // 1/2(Dx + i Dy), 1/2(Dx - i Dy)
  Mat dbB, dB;        // -(dF)^H, -(dbF)^H: the backward copies
  Mat P, Q, Lap;      // 1/2(dbF dbF^H + dbB dbB^H), 1/2(dbF^H dbF + dbB^H dbB), 1/2(Dx^H Dx + Dy^H Dy)
  Eig eP, eQ, eLap;

  FactorOps(int n, int flux);
  double plaquette_angle(int x, int y) const;
  std::complex<double> ux(int x, int y) const;
  std::complex<double> uy(int x, int y) const;
};

class FactorCache {
 public:
  explicit FactorCache(int N) : N_(N) {}
  const FactorOps& get(int m) const;
  int N() const { return N_; }

 private:
  int N_;
  mutable std::mutex mu_;
  mutable std::map<int, std::unique_ptr<FactorOps>> ops_;
};

}  // namespace hym
