#pragma once
// End(E)-valued lattice fields. A field is stored blockwise: block (i,j) is
// an N^2 x N^2 complex array, rows indexed by the factor-1 site, columns by
// the factor-2 site (flat site index p1*N^2 + p2).

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace hym {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;

struct EndField {
  int r = 0;
  int n2 = 0;
  std::vector<Mat> b;  // r*r blocks

  EndField() = default;
  EndField(int rank, int sites_per_factor) : r(rank), n2(sites_per_factor), b(rank * rank, Mat::Zero(sites_per_factor, sites_per_factor)) {}

  Mat& operator()(int i, int j) { return b[i * r + j]; }
  const Mat& operator()(int i, int j) const { return b[i * r + j]; }

  EndField& operator+=(const EndField& o) {
    for (size_t k = 0; k < b.size(); ++k) b[k] += o.b[k];
    return *this;
  }
  EndField& operator-=(const EndField& o) {
    for (size_t k = 0; k < b.size(); ++k) b[k] -= o.b[k];
    return *this;
  }
  EndField& operator*=(cd s) {
    for (auto& m : b) m *= s;
    return *this;
  }
  friend EndField operator+(EndField a, const EndField& c) { return a += c; }
  friend EndField operator-(EndField a, const EndField& c) { return a -= c; }
  friend EndField operator*(cd s, EndField a) { return a *= s; }

  void set_zero() {
    for (auto& m : b) m.setZero();
  }
  EndField zero_like() const { return EndField(r, n2); }
  double max_abs() const {
    double m = 0;
    for (auto& x : b) m = std::max(m, x.cwiseAbs().maxCoeff());
    return m;
  }
  long size() const { return long(r) * r * n2 * n2; }
};

// pointwise A B
EndField mul(const EndField& A, const EndField& B);
// pointwise A^dagger
EndField adj(const EndField& A);
// pointwise [A, B]
EndField comm(const EndField& A, const EndField& B);
// constant matrix at every site
EndField constant(const Mat& M, int n2);
EndField identity(int r, int n2);
// f(A) at every site for Hermitian A (f applied to eigenvalues)
EndField herm_apply(const EndField& A, double (*f)(double));
// pointwise inverse; throws DomainError-like ConfigError when singular
EndField inverse(const EndField& A, double tol = 1e-13);
// pointwise trace as an N^2 x N^2 array
Mat trace(const EndField& A);
// Re sum tr(A B^dagger) W   (W the weight array, e.g. Vol * a^4)
double inner(const EndField& A, const EndField& B, const RMat& W);
cd cinner(const EndField& A, const EndField& B, const RMat& W);
// Hermitian part (A + A^dagger)/2
EndField herm_part(const EndField& A);

// differential forms: components in a fixed frame
//   (0,0): 1      (0,1): dzb1, dzb2      (1,0): dz1, dz2
//   (1,1): dz_j ^ dzb_k at index 2j+k     (0,2): dzb1 ^ dzb2
struct Form {
  int p = 0, q = 0;
  std::vector<EndField> c;

  Form() = default;
  Form(int pp, int qq, int r, int n2) : p(pp), q(qq), c(ncomp(pp, qq), EndField(r, n2)) {}
  static int ncomp(int p, int q) {
    if (p + q == 0) return 1;
    if (p + q == 1) return 2;
    if (p == 1 && q == 1) return 4;
    return 1;
  }
  Form& operator+=(const Form& o) {
    for (size_t k = 0; k < c.size(); ++k) c[k] += o.c[k];
    return *this;
  }
  Form& operator-=(const Form& o) {
    for (size_t k = 0; k < c.size(); ++k) c[k] -= o.c[k];
    return *this;
  }
  Form& operator*=(cd s) {
    for (auto& e : c) e *= s;
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(cd s, Form a) { return a *= s; }
  Form zero_like() const {
    Form f = *this;
    for (auto& e : f.c) e.set_zero();
    return f;
  }
  double max_abs() const {
    double m = 0;
    for (auto& e : c) m = std::max(m, e.max_abs());
    return m;
  }
};

// flatten / unflatten for the iterative solvers
Vec flatten(const EndField& A);
void unflatten(const Vec& v, EndField& A);
Vec flatten(const Form& A);
void unflatten(const Vec& v, Form& A);

}  // namespace hym
