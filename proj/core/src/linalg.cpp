#include "hym/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace hym::linalg {

SolveResult pcg(const LinOp& A, const LinOp& M, const Vec& b, Vec x0, double tol, int max_iter) {
  SolveResult res;
  const double nb = b.norm();
  if (nb == 0) {
    res.x = Vec::Zero(b.size());
    res.converged = true;
    return res;
  }
  Vec x = std::move(x0);
  Vec r = b - A(x);
  Vec z = M(r);
  Vec p = z;
  std::complex<double> rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    res.rel_residual = r.norm() / nb;
    if (res.rel_residual <= tol) {
      res.converged = true;
      res.iterations = it;
      res.x = x;
      return res;
    }
    Vec Ap = A(p);
    const std::complex<double> pAp = p.dot(Ap);
    if (std::abs(pAp) == 0) break;
    const std::complex<double> alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = M(r);
    const std::complex<double> rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    res.iterations = it + 1;
  }
  res.rel_residual = (b - A(x)).norm() / nb;
  res.converged = res.rel_residual <= tol;
  res.x = x;
  return res;
}

SolveResult gmres(const LinOp& A, const LinOp& M, const Vec& b, Vec x0, double tol, int restart,
                  int max_iter) {
  SolveResult res;
  const double nb = b.norm();
  Vec x = std::move(x0);
  if (nb == 0) {
    res.x = Vec::Zero(b.size());
    res.converged = true;
    return res;
  }
  int total = 0;
  while (total < max_iter) {
    Vec r = b - A(x);
    double beta = r.norm();
    res.rel_residual = beta / nb;
    if (res.rel_residual <= tol) {
      res.converged = true;
      break;
    }
    const int m = restart;
    Mat V(b.size(), m + 1), Z(b.size(), m);
    Mat H = Mat::Zero(m + 1, m);
    V.col(0) = r / beta;
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    g[0] = beta;
    std::vector<std::complex<double>> cs(m), sn(m);
    int j = 0;
    for (; j < m && total < max_iter; ++j, ++total) {
      Z.col(j) = M(V.col(j));
      Vec w = A(Z.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) > 0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        auto t = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(std::abs(H(j, j)), std::abs(H(j + 1, j)));
      cs[j] = den == 0 ? 1.0 : H(j, j) / den;
      sn[j] = den == 0 ? 0.0 : H(j + 1, j) / den;
      H(j, j) = den;
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      res.rel_residual = std::abs(g[j + 1]) / nb;
      if (res.rel_residual <= tol) {
        ++j;
        ++total;
        break;
      }
    }
    Eigen::VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += Z.leftCols(j) * y;
  }
  res.iterations = total;
  res.rel_residual = (b - A(x)).norm() / nb;
  res.converged = res.rel_residual <= tol;
  res.x = x;
  return res;
}

Mat orthonormalize(const Mat& X, double drop) {
  // modified Gram-Schmidt twice
  Mat Q(X.rows(), X.cols());
  int k = 0;
  for (int j = 0; j < X.cols(); ++j) {
    Vec v = X.col(j);
    const double n0 = v.norm();
    if (n0 == 0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < k; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    const double n1 = v.norm();
    if (n1 <= drop * n0) continue;
    Q.col(k++) = v / n1;
  }
  return Q.leftCols(k);
}

EigResult lobpcg(const LinOp& A, const LinOp& T, Mat X0, double tol, int max_iter) {
  EigResult out;
  const int k = int(X0.cols());
  auto applyA = [&](const Mat& X) {
    Mat Y(X.rows(), X.cols());
    for (int j = 0; j < X.cols(); ++j) Y.col(j) = A(X.col(j));
    return Y;
  };
  auto rayleigh_ritz = [&](const Mat& S, int want, Mat& vecs, Eigen::VectorXd& vals) {
    Mat AS = applyA(S);
    Mat G = S.adjoint() * AS;
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    vals = es.eigenvalues().head(want);
    vecs = S * es.eigenvectors().leftCols(want);
  };
  Mat X = orthonormalize(X0);
  Eigen::VectorXd lam;
  Mat Xn;
  rayleigh_ritz(X, int(X.cols()), Xn, lam);
  X = Xn;
  Mat P;
  for (int it = 0; it < max_iter; ++it) {
    Mat AX = applyA(X);
    Mat R = AX - X * lam.asDiagonal();
    double maxres = 0;
    for (int j = 0; j < R.cols(); ++j)
      maxres = std::max(maxres, R.col(j).norm() / std::max(1.0, std::abs(lam[j])));
    out.iterations = it;
    out.max_residual = maxres;
    if (maxres <= tol) {
      out.converged = true;
      break;
    }
    Mat W(R.rows(), R.cols());
    for (int j = 0; j < R.cols(); ++j) W.col(j) = T(R.col(j));
    Mat S(X.rows(), X.cols() + W.cols() + P.cols());
    S << X, W, P;
    S = orthonormalize(S, 1e-12);
    Mat Xnew;
    rayleigh_ritz(S, std::min<int>(k, int(S.cols())), Xnew, lam);
    P = Xnew - X * (X.adjoint() * Xnew);
    X = Xnew;
  }
  out.values = lam;
  out.vectors = X;
  return out;
}

}  // namespace hym::linalg
