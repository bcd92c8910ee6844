#pragma once

// Convex comparison solvers.

#include "rpca/support.hpp"

#include <vector>

namespace rpca {

struct PcpResult {
  Matrix z;
  Matrix e;
  Matrix q;  // final multiplier (scaled dual of the constraint Y = Z + E)
  int iterations = 0;
  bool converged = false;
};

// min ||Z||_* + lambda_pcp ||E||_1  s.t.  Y = Z + E, inexact ALM with
// mu_0 = 1.25/||Y||_2, growth 1.5, mu capped at 1e7 mu_0 and Q_0 = 0.
// lambda_pcp <= 0 selects 1/sqrt(max(n, m)). Stops when
// ||Y - Z - E||_F / ||Y||_F < tol.
PcpResult pcp_alm(const Matrix& y, double lambda_pcp = 0.0, double tol = 1e-7,
                  int max_iters = 1000);

struct McResult {
  Matrix z;
  int iterations = 0;
  bool converged = false;
  double max_violation = 0.0;  // max over Omega of |z - y|
};

// min ||Z||_* s.t. z_ij = y_ij on Omega, inexact ALM with a free
// variable E supported off Omega. mu_0 = 1.25/||P_Omega(Y)||_2, growth 1.2.
// Stops when max_{Omega} |z - y| < tol.
McResult mc_alm(const Matrix& y, const SupportMask& omega, double tol = 1e-7,
                int max_iters = 2000);

struct RegularizedPcpResult {
  Matrix z;
  Matrix e;
  double objective = 0.0;
  std::vector<double> objective_trace;  // one value per sweep, starting at Z = E = 0
  int iterations = 0;
  bool converged = false;
};

// (1/(2 lambda)) ||Y - Z - E||_F^2 + sqrt(n) ||Z||_* + ||E||_1 for square Y.
double regularized_pcp_objective(const Matrix& y, const Matrix& z, const Matrix& e,
                                 double lambda);

// Exact block-coordinate descent on Z then E. Stops when a sweep lowers the
// objective by no more than tol relative.
RegularizedPcpResult regularized_pcp(const Matrix& y, double lambda, double tol = 1e-14,
                                     int max_iters = 10000);

struct TraceVariantState {
  Matrix z_c;
  Matrix z_r;
  Matrix e;
  Matrix psi_c;
  Matrix psi_r;
  Matrix gamma;
};

struct TraceVariantResult {
  TraceVariantState state;
  // (1/(2 lambda sqrt n)) ||Y - Z_c - Z_r - E||^2 + ||Z_c||_* + ||Z_r||_* + ||E||_1/sqrt n
  double collapsed_objective = 0.0;
  // sqrt(n) * collapsed_objective, the scale of regularized_pcp_objective.
  double objective = 0.0;
  // Half the trace-form cost y^T Sigma^{-1} y + n tr Psi_c + n tr Psi_r + ||Gamma||_1,
  // evaluated through the dense covariance at the final hyperparameters.
  double covariance_objective = 0.0;
  // ||Psi_c - (Z_c Z_c^T / n)^{1/2}||_F / ||Psi_c||_F, and the Psi_r analogue,
  // with Psi from the last hyperparameter step and Z from the last
  // quadratic step.
  double fixed_point_residual_c = 0.0;
  double fixed_point_residual_r = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dense covariance path: n*n <= kTraceVariantMaxEntries.
inline constexpr Eigen::Index kTraceVariantMaxEntries = 1600;

double collapsed_trace_objective(const Matrix& y, const Matrix& z_c, const Matrix& z_r,
                                 const Matrix& e, double lambda);

// Minimizes the trace-form cost over (Psi_c, Psi_r, Gamma, Z_c, Z_r, E).
// Stage one runs accelerated proximal gradient with restart on the
// collapsed (Z_c, Z_r, E) problem. Stage two alternates the closed-form
// hyperparameter step
//   Psi_c = (Z_c Z_c^T/n)^{1/2}, Psi_r = (Z_r^T Z_r/n)^{1/2}, gamma = |e|
// with the quadratic step
//   z_c = (I (x) Psi_c) w, z_r = (Psi_r (x) I) w, e = Gamma w,
//   w = (Psi_r (x) I + I (x) Psi_c + Gamma + lambda I)^{-1} y
// for `closure_rounds` rounds.
TraceVariantResult trace_variant_solve(const Matrix& y, double lambda, double tol = 1e-14,
                                       int max_iters = 20000, int closure_rounds = 2);

}  // namespace rpca
