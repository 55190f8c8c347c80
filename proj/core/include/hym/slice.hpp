#pragma once
// Finite-dimensional reduction around the graded operator dbar_0: harmonic
// space V, automorphism algebra k, Kuranishi map, the perturbation sigma and
// the moment map nu on the perturbed slice.

#include <optional>

#include "hym/lattice.hpp"

namespace hym {

struct KernelError : SolverError {
  using SolverError::SolverError;
};
struct RadiusError : SolverError {
  using SolverError::SolverError;
};
struct NeighborhoodError : SolverError {
  using SolverError::SolverError;
};

using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

struct HarmonicBasis {
  std::vector<Form> v;                  // orthonormal in <,>_0 (complex)
  std::vector<std::array<int, 3>> tag;  // (i, j, component)
  RVec eigenvalues;
  double threshold = 0;
  double gap = 0;  // smallest discarded eigenvalue
  int dim() const { return int(v.size()); }
};

struct AutAlgebra {
  std::vector<Mat> k;              // r x r constant anti-Hermitian, trace free
  std::vector<EndField> kfield;    // the same as lattice fields
  std::vector<Mat> action;         // (A_j)_{mn} = <[k_j, v_n], v_m>
  std::vector<EndField> kernel;    // complex ONB of ker Delta_0 on sections
  double threshold = 0;
  double gap = 0;
  double parallel_residual = 0;
  int dim() const { return int(k.size()); }
};

HarmonicBasis harmonic_basis(const Lattice& L, double tau = 1.0, unsigned long long seed = 1);
AutAlgebra aut_algebra(const Lattice& L, const HarmonicBasis& V, double tau = 0.1,
                       unsigned long long seed = 2);

struct SliceParams {
  double tol_sigma = 1e-9;     // relative to the curvature scale
  int max_chord = 60;
  int max_newton = 30;
  double kuranishi_tol = 1e-13;
  int kuranishi_max = 200;
  double ball_radius = 1.0;
  double eps_radius = 0.05;    // times min(t1, t2)
};

struct PerturbedPoint {
  CVec b;
  Perturbation eps;
  EndField s;         // sigma(eps, b), Hermitian
  Form gamma_b;       // Phi(b)
  Form gamma;         // e^s . dbar_b - dbar_0
  RVec nu;            // coordinates in the k basis
  double residual = 0;      // |Psi|
  double off_k = 0;         // |Lambda iF - c - projection onto i k|
  int iterations = 0;
  bool newton = false;
};

class Slice {
 public:
  Slice(const Lattice& L, double tau_V = 1.0, double tau_K = 0.1, SliceParams p = {});
  Slice(const Lattice& L, HarmonicBasis V, AutAlgebra K, SliceParams p = {});

  const Lattice& lattice() const { return L_; }
  const HarmonicBasis& V() const { return V_; }
  const AutAlgebra& K() const { return K_; }
  const SliceParams& params() const { return p_; }
  double curvature_scale() const { return kappa_; }

  Form expand(const CVec& b) const;      // v_b
  CVec coords(const Form& a) const;      // <a, v_m>_0
  Form project_V(const Form& a) const;
  Form kuranishi_phi(const CVec& b, double* increment = nullptr, int* iters = nullptr) const;

  Metric metric(const Perturbation& e) const;
  void check_eps(const Perturbation& e) const;

  // Psi(eps, b, s) = Pi_perp(i Lambda_eps F(e^s . dbar_b) - c_eps)
  EndField psi(const Perturbation& e, const Form& gamma_b, const EndField& s) const;
  PerturbedPoint sigma_solve(const Perturbation& e, const CVec& b,
                             const EndField* warm = nullptr) const;
  RVec moment_coords(const EndField& X, const Metric& m, double* off = nullptr) const;
  PerturbedPoint moment_map(const Perturbation& e, const CVec& b, const EndField* warm = nullptr) const {
    return sigma_solve(e, b, warm);
  }
  Mat k_matrix(const RVec& nu) const;  // sum nu_j k_j

  // Omega^D(a, b) = 2 Re(i <a, b>_eps)
  double omega_D(const Form& a, const Form& b, const Metric& m) const;
  // derivative of Phi~(eps, .) at b along v (central differences, Richardson)
  Form dphi_tilde(const Perturbation& e, const CVec& b, const CVec& v, double h) const;
  double omega(const Perturbation& e, const CVec& b, const CVec& v, const CVec& w, double h = 0) const;

  // coordinate action of a constant group element g in K^C: coords of g v_b g^-1
  CVec act(const Mat& g, const CVec& b) const;
  // infinitesimal action of k-element a on b
  CVec infinitesimal(const RVec& a, const CVec& b) const;

  // projection of a Hermitian section off ker Delta_0 in the metric W
  EndField project_kernel_off(const EndField& x, const RMat& W) const;

 private:
  const Lattice& L_;
  HarmonicBasis V_;
  AutAlgebra K_;
  SliceParams p_;
  double kappa_ = 1;
  void init();
};

}  // namespace hym
