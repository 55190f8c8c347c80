#include "hym/field.hpp"

#include <Eigen/Eigenvalues>

#include "hym/grid.hpp"

namespace hym {

namespace {
// small per-site matrices without heap traffic
using Small = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
using SmallR = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

void check_small(int r) {
  if (r > 8) throw ConfigError("pointwise matrix functions support rank <= 8");
}
}  // namespace

EndField mul(const EndField& A, const EndField& B) {
  EndField C(A.r, A.n2);
  for (int i = 0; i < A.r; ++i)
    for (int j = 0; j < A.r; ++j)
      for (int k = 0; k < A.r; ++k) C(i, j).array() += A(i, k).array() * B(k, j).array();
  return C;
}

EndField adj(const EndField& A) {
  EndField C(A.r, A.n2);
  for (int i = 0; i < A.r; ++i)
    for (int j = 0; j < A.r; ++j) C(i, j) = A(j, i).conjugate();
  return C;
}

EndField comm(const EndField& A, const EndField& B) { return mul(A, B) - mul(B, A); }

EndField herm_part(const EndField& A) {
  EndField H = A + adj(A);
  H *= 0.5;
  return H;
}

EndField constant(const Mat& M, int n2) {
  EndField C(int(M.rows()), n2);
  for (int i = 0; i < C.r; ++i)
    for (int j = 0; j < C.r; ++j) C(i, j).setConstant(M(i, j));
  return C;
}

EndField identity(int r, int n2) { return constant(Mat::Identity(r, r), n2); }

EndField herm_apply(const EndField& A, double (*f)(double)) {
  const int r = A.r;
  EndField C(r, A.n2);
  if (r == 1) {
    C.b[0] = A.b[0].real().unaryExpr([f](double x) { return f(x); }).cast<cd>();
    return C;
  }
  check_small(r);
  Small S(r, r);
  Eigen::SelfAdjointEigenSolver<Small> es;
  for (int p = 0; p < A.n2; ++p)
    for (int q = 0; q < A.n2; ++q) {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) S(i, j) = A(i, j)(p, q);
      es.compute(S);
      SmallR ev = es.eigenvalues();
      for (int i = 0; i < r; ++i) ev[i] = f(ev[i]);
      Small R = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) C(i, j)(p, q) = R(i, j);
    }
  return C;
}

EndField inverse(const EndField& A, double tol) {
  const int r = A.r;
  check_small(r);
  EndField C(r, A.n2);
  Small S(r, r);
  for (int p = 0; p < A.n2; ++p)
    for (int q = 0; q < A.n2; ++q) {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) S(i, j) = A(i, j)(p, q);
      Eigen::PartialPivLU<Small> lu(S);
      if (std::abs(lu.determinant()) <= tol * std::pow(S.norm() + 1e-300, r))
        throw ConfigError("gauge transformation singular at a site");
      Small R = lu.inverse();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) C(i, j)(p, q) = R(i, j);
    }
  return C;
}

Mat trace(const EndField& A) {
  Mat t = Mat::Zero(A.n2, A.n2);
  for (int i = 0; i < A.r; ++i) t += A(i, i);
  return t;
}

cd cinner(const EndField& A, const EndField& B, const RMat& W) {
  cd s = 0;
  for (size_t k = 0; k < A.b.size(); ++k)
    s += (A.b[k].array() * B.b[k].array().conjugate() * W.array()).sum();
  return s;
}

double inner(const EndField& A, const EndField& B, const RMat& W) { return cinner(A, B, W).real(); }

Vec flatten(const EndField& A) {
  Vec v(A.size());
  long o = 0;
  const long n = long(A.n2) * A.n2;
  for (auto& m : A.b) {
    v.segment(o, n) = Eigen::Map<const Vec>(m.data(), n);
    o += n;
  }
  return v;
}

void unflatten(const Vec& v, EndField& A) {
  long o = 0;
  const long n = long(A.n2) * A.n2;
  for (auto& m : A.b) {
    Eigen::Map<Vec>(m.data(), n) = v.segment(o, n);
    o += n;
  }
}

Vec flatten(const Form& A) {
  long total = 0;
  for (auto& e : A.c) total += e.size();
  Vec v(total);
  long o = 0;
  for (auto& e : A.c) {
    v.segment(o, e.size()) = flatten(e);
    o += e.size();
  }
  return v;
}

void unflatten(const Vec& v, Form& A) {
  long o = 0;
  for (auto& e : A.c) {
    unflatten(v.segment(o, e.size()), e);
    o += e.size();
  }
}

}  // namespace hym
