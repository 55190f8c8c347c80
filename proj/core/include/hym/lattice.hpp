#pragma once
// Lattice Dolbeault geometry on End(E) for E a sum of flux line bundles.
//
// A Dolbeault operator is dbar_0 + gamma with dbar_0 the forward covariant
// difference 1/2(Dx + i Dy) and gamma an End(E)-valued (0,1)-form. Hom block
// (i,j) of any End-valued field sees the links of flux m_i - m_j. Every base
// operator factorizes over the two torus factors, so block (i,j) operators are
// w1 A (x) I + I (x) w2 B and act on the N^2 x N^2 array X as
// w1 A X + w2 X B^T.

#include <functional>
#include <memory>
#include <string>

#include "hym/factor.hpp"
#include "hym/field.hpp"
#include "hym/grid.hpp"

namespace hym {

using RVecLike = Eigen::VectorXd;

enum class Op { DbarF, DF, DbarB, DB, Dx, Dy };
enum class LapKind { Del, Dbar, Nabla };

struct KahlerReport {
  double first = 0;   // |Lambda d a - i dbar^* a| / |a|
  double second = 0;  // |Lap_d s - i Lambda dbar d s| / |s|
  double third = 0;   // |(Lap_d - Lap_dbar) s - [i Lambda F, s]| / |s|
};

class Lattice {
 public:
  Lattice(const TorusGrid& g, const BundleSpec& e);

  const TorusGrid& grid() const { return grid_; }
  const BundleSpec& bundle() const { return bundle_; }
  const Metric& metric0() const { return m0_; }
  int r() const { return bundle_.r; }
  int n2() const { return grid_.n2(); }
  double w(int k) const { return k == 0 ? 2.0 / grid_.t1 : 2.0 / grid_.t2; }

  const FactorOps& fac(int k, int i, int j) const;

  // one factor operator on every block (k = 0, 1)
  EndField apply(Op op, int k, const EndField& X) const;
  EndField apply_adj(Op op, int k, const EndField& X) const;

  EndField zero() const { return EndField(r(), n2()); }
  Form zero_form(int p, int q) const { return Form(p, q, r(), n2()); }

  // curvature of dbar_0 + gamma; components dz_j ^ dzb_k at 2j+k
  Form curvature(const Form& gamma) const;
  Form base_curvature() const;
  // Lambda alpha for a (1,1)-form
  EndField contract(const Form& alpha, const Metric& m) const;
  EndField i_lambda_F(const Form& gamma, const Metric& m) const;
  double einstein_constant(const Metric& m) const;
  EndField hym_defect(const Form& gamma, const Metric& m) const;  // i Lambda F - c Id
  double hym_residual(const Form& gamma, const Metric& m) const;
  // (0,2) part of the curvature: dbar_0 gamma + gamma ^ gamma
  Form integrability(const Form& gamma) const;
  // f . dbar  =  dbar_0 + f gamma f^-1 + f dbar_0(f^-1)
  Form gauge_act(const EndField& f, const Form& gamma) const;
  Form gauge_act(const EndField& f, const EndField& finv, const Form& gamma) const;

  // forward operators on sections and two-copy adjoints on forms
  Form dbar(const EndField& s) const;
  Form del(const EndField& s) const;
  Form dbar01(const Form& a) const;            // (0,1) -> (0,2), forward
  Form dbar01_star(const Form& c) const;       // (0,2) -> (0,1), two-copy
  EndField dbar_star(const Form& a) const;     // (0,1) -> sections, two-copy
  Form wedge01(const Form& a, const Form& b) const;

  // Laplacians at the unperturbed metric
  EndField laplacian(LapKind kind, const EndField& s) const;
  Form laplacian01(const Form& a) const;
  Form laplacian02(const Form& c) const;

  // exact inverses by factor diagonalization; modes with eigenvalue below
  // kernel_tol are dropped (pseudo-inverse)
  EndField solve_sections(const EndField& rhs, double kernel_tol = 1e-9) const;
  Form solve01(const Form& rhs, double kernel_tol = 1e-9) const;
  Form solve02(const Form& rhs, double kernel_tol = 1e-9) const;
  // e^{-tau Lap_nabla} on sections
  EndField heat(const EndField& s, double tau) const;

  // single Hom-block versions of the base Laplacians (for eigen solves);
  // fn is applied to the Laplacian's eigenvalues
  enum class Family { Sections, Form01a, Form01b, Form02 };
  Mat block_apply(Family fam, int i, int j, const Mat& X) const;
  Mat block_fn(Family fam, int i, int j, const Mat& X, const std::function<double(double)>& fn) const;
  // factor eigenvalue sums of a block Laplacian, ascending (Kunneth)
  RVecLike block_spectrum(Family fam, int i, int j) const;

  // Green operator of Delta_0 = Lap_nabla by preconditioned CG
  struct GreenResult {
    EndField x;
    double projected = 0;  // norm of the kernel part removed from rhs
    double residual = 0;
    int iterations = 0;
  };
  GreenResult green_solve(const EndField& rhs, double tol, int max_iter = 200) const;

  // kernel of Delta_0 on sections: orthonormal (w.r.t. <,>_0) basis,
  // read off the factor spectra
  std::vector<EndField> section_kernel(double tol = 1e-8) const;
  EndField project_off(const std::vector<EndField>& onb, const EndField& x, const RMat& W) const;

  // inner products
  RMat vol_weight(const Metric& m) const;  // Vol a^4
  double inner(const EndField& a, const EndField& b, const Metric& m) const;
  double inner(const Form& a, const Form& b, const Metric& m) const;
  cd cinner(const Form& a, const Form& b, const Metric& m) const;
  double norm(const EndField& a, const Metric& m) const { return std::sqrt(inner(a, a, m)); }
  double norm(const Form& a, const Metric& m) const { return std::sqrt(inner(a, a, m)); }

  KahlerReport kahler_residuals(int samples, unsigned long long seed, double tau = 0.02) const;

 private:
  TorusGrid grid_;
  BundleSpec bundle_;
  Metric m0_;
  FactorCache cache_;

  const Mat& opmat(Op op, const FactorOps& f) const;
  EndField tensor_apply(const EndField& X, const std::function<const Mat&(const FactorOps&)>& A,
                        double wa, const std::function<const Mat&(const FactorOps&)>& B,
                        double wb) const;
  EndField tensor_solve(const EndField& R, const std::function<const Eig&(const FactorOps&)>& A,
                        double wa, const std::function<const Eig&(const FactorOps&)>& B, double wb,
                        double tol, const std::function<double(double)>& fn = {}) const;
};

// random End-valued field with iid complex Gaussian entries
EndField random_field(int r, int n2, unsigned long long seed);
Form random_form(int p, int q, int r, int n2, unsigned long long seed);

// binary snapshot: int64 N, int64 r, int32 p, int32 q, then components,
// sites (row-major p1*N^2+p2) and matrix entries (row-major), each as
// float64 (re, im), little-endian
void write_snapshot(const std::string& path, const Form& f, int N);
Form read_snapshot(const std::string& path, int* N = nullptr);

}  // namespace hym
