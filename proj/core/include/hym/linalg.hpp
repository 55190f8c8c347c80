#pragma once
// Krylov and block eigen solvers on flat complex vectors.

#include <Eigen/Dense>

#include <functional>

namespace hym::linalg {

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using LinOp = std::function<Vec(const Vec&)>;

struct SolveResult {
  Vec x;
  int iterations = 0;
  double rel_residual = 0;
  bool converged = false;
};

// preconditioned CG for Hermitian positive (semi)definite A, b in range(A)
SolveResult pcg(const LinOp& A, const LinOp& M, const Vec& b, Vec x0, double tol, int max_iter);

// restarted right-preconditioned GMRES
SolveResult gmres(const LinOp& A, const LinOp& M, const Vec& b, Vec x0, double tol,
                  int restart, int max_iter);

struct EigResult {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // orthonormal columns
  int iterations = 0;
  double max_residual = 0;
  bool converged = false;
};

// smallest k eigenpairs of Hermitian A, preconditioner T, start block X0
EigResult lobpcg(const LinOp& A, const LinOp& T, Mat X0, double tol, int max_iter);

// orthonormal basis of the column span (drops near-dependent columns)
Mat orthonormalize(const Mat& X, double drop = 1e-10);

}  // namespace hym::linalg
