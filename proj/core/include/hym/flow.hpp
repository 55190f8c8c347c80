#pragma once
// Moment-map flow b' = -i L_b nu(b) on the perturbed slice, the companion
// group path g^-1 g' = i nu, the Donaldson functional along the realized
// path, destabilizer extraction and the sweep-level bound fits.

#include <optional>
#include <string>
#include <vector>

#include "hym/slice.hpp"

namespace hym::flow {

struct BallExitError : RadiusError {
  std::vector<double> t, b_norm;
  BallExitError(const std::string& w, double r) : RadiusError(w, r) {}
};
struct InsufficientData : ConfigError {
  using ConfigError::ConfigError;
};
struct InconclusiveDestabilizer : SolverError {
  using SolverError::SolverError;
};

struct FlowParams {
  double tol_nu = 1e-7;         // Converged when |nu| drops below
  double tol_hym = 1e-5;        // required of the limit operator
  double rtol = 1e-7;           // local error target of the integrator
  double h0 = 0.05;
  double h_max = 5.0;
  double t_max = 400.0;
  int max_steps = 600;
  double mono_slack = 1e-8;     // allowed |nu| increase per accepted step
  double orbit_tol = 1e-6;
  double destab_ratio = 1e-3;   // |Phi(b)| / |Phi(b0)| threshold
  double cond_max = 1e6;
  int max_halvings = 20;        // starting-point rule
};

enum class Outcome { Converged, Destabilized, BudgetExceeded };
const char* outcome_name(Outcome o);

struct TrajRow {
  double t = 0, nu_norm = 0, phi = 0, b_norm = 0, step = 0, hym_residual = 0;
  double orbit_err = 0;
  double dphi = 0, dphi_ref = 0;  // increment of phi and of -2 int |nu|^2 dt over the step
};

struct FlowState {
  double t = 0;
  CVec b;
  Mat g;
  double phi = 0;
  double nu_norm = 0;
};

struct Destabilizer {
  Mat xi;                                  // Hermitian, trace free, unit norm
  RVec lambda;                             // distinct eigenvalues, increasing
  std::vector<std::vector<int>> blocks;    // components in each eigenspace (xi diagonal in the splitting)
  Mat basis;                               // eigenvectors, columns ordered by lambda
  double lower = 0;                        // strictly lower part of Phi(b) in that basis
  double probe_time = 0;
  double decay = 0;                        // |e^{T xi} . b| / |b|
};

struct FlowReport {
  Outcome outcome = Outcome::BudgetExceeded;
  Perturbation eps;
  CVec b_start;          // after the starting-point rule
  int halvings = 0;
  FlowState final;
  PerturbedPoint point;  // at the final state
  std::vector<TrajRow> rows;
  int rejected = 0;
  int rejected_monotone = 0;
  double max_orbit_err = 0;
  double max_nu_increase = 0;
  double cond_g = 1;
  double phi_ratio_fraction = 0;   // steps with dphi / dphi_ref in [0.9, 1.1]
  double max_s_norm = 0;
  double min_phi = 0;
  std::optional<Destabilizer> destab;
  std::string diagnostics;
};

// norm of sum nu_j k_j in the perturbed metric
double nu_norm(const Slice& S, const PerturbedPoint& p);
CVec vector_field(const Slice& S, const PerturbedPoint& p);
CVec vector_field(const Slice& S, const Perturbation& e, const CVec& b);

FlowReport integrate(const Slice& S, const Perturbation& e, const CVec& b0, const FlowParams& fp = {});

// int tr((f' f^-1 + h.c.) X) Vol_eps for the Hermitian-metric variation f'
// at f and HYM defect X
double donaldson_increment(const Lattice& L, const EndField& f, const EndField& fdot,
                           const EndField& X, const Metric& m);
// M along the path f(u) = exp((1-u) A + u B) from f = e^A to e^B, acting on
// dbar_0 + gamma (Simpson quadrature with n intervals, n even)
double donaldson_path(const Lattice& L, const Form& gamma, const EndField& A, const EndField& B,
                      const Metric& m, int n = 16);

Destabilizer destabilizer_extract(const Slice& S, const FlowReport& rep);

// curvature pairing for the sub-bundle spanned by the components in sub;
// l_S is the wall functional evaluated at the perturbed class
struct Pairing {
  double lhs = 0, rhs = 0, beta2 = 0;
};
Pairing pairing_check(const Lattice& L, const Form& gamma, const Metric& m, const std::vector<int>& sub,
                      double l_S);

struct SweepPoint {
  Perturbation eps;
  double b_norm = 0;
  double nu_norm = 0;
  double dist = 0;     // |dbar_eps - dbar_0| in the discrete A-norm
};
struct BoundFit {
  int n = 0;
  double C_norm = 0;         // smallest C in |b|^2 <= C (|nu| + |eps|^2 + |[eps]|)
  double C_spread = 0;       // max / min of the ratio across the sweep
  double exact_slope = 0;    // log-log slope of dist against |eps|
  double exact_C = 0;        // smallest C in dist <= C |eps|
  double exact_spread = 0;
  double moduli_slope = 0;   // log-log slope of dist against |[eps]|
};
BoundFit bound_verify(const std::vector<SweepPoint>& exact, const std::vector<SweepPoint>& moduli);
double a_norm(const Lattice& L, const Form& gamma, const Metric& m);

// gauge-invariant summary of an operator: quantiles of the pointwise
// spectrum of i Lambda F, block norms |gamma_ij|, hym residual
RVec gamma_observables(const Lattice& L, const Form& gamma, const Metric& m);

}  // namespace hym::flow
