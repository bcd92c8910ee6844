#pragma once

// Pseudo-Bayesian RPCA. The cost minimized over (Psi_c, Psi_r, Gamma) is
//
//   L = y^T Sigma_y^{-1} y + sum_j log|S_c^j| + sum_i log|S_r^i|,
//   Sigma_y = Psi_r (x) I + I (x) Psi_c + diag(vec Gamma) + lambda I,
//   S_c^j   = Psi_c + diag(Gamma(:, j))/2 + (lambda/2) I,
//   S_r^i   = Psi_r + diag(Gamma(i, :))/2 + (lambda/2) I,
//
// by majorization-minimization: a Z/E step (ze_subproblem), bound
// gradients, then closed-form hyperparameter updates.

#include "rpca/hyper_state.hpp"
#include "rpca/ze_subproblem.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace rpca {

enum class GammaUpdate {
  PaperLiteral,         // gamma = z^2 + u_c + u_r
  ESquaredPlusU,        // gamma = e^2 + u_c + u_r
  ESquaredPlusUHalved,  // gamma = (e^2 + u_c + u_r) / 2
};

std::string_view to_string(GammaUpdate v);
// Accepts "paper", "esq", "esq-half". Throws DomainError otherwise.
GammaUpdate parse_gamma_update(std::string_view s);

struct GradientSet {
  Matrix g_c;  // n x n, sum_j (Psi_c - Psi_c (S_c^j)^{-1} Psi_c)
  Matrix g_r;  // m x m, sum_i (Psi_r - Psi_r (S_r^i)^{-1} Psi_r)
  Matrix u_c;  // n x m, u_c(i,j) = gamma_ij - gamma_ij^2 [(S_c^j)^{-1}]_ii / 2
  Matrix u_r;  // n x m, u_r(i,j) = gamma_ij - gamma_ij^2 [(S_r^i)^{-1}]_jj / 2
};

struct IterationInfo {
  int iteration;  // 1-based
  const HyperState& state;  // after the update
  const Matrix& z;
  const Matrix& e;
  const AdmmResult& admm;
};

struct SolverConfig {
  double lambda = 1e-6;
  int max_outer_iters = 100;
  double outer_tol = 1e-6;
  GammaUpdate gamma_update = GammaUpdate::ESquaredPlusU;
  bool symmetric = true;  // false: Psi_r held at zero
  AdmmConfig admm;
  bool objective_tracking = false;
  std::function<void(const IterationInfo&)> observer;

  void validate() const;
};

struct Decomposition {
  Matrix z;
  Matrix e;
  // objective_trace[0] is the initial state, entry t the value after the
  // t-th hyperparameter update. Empty unless tracking is on.
  std::vector<double> objective_trace;
  int outer_iters = 0;
  bool converged = false;
  int admm_iters = 0;  // summed over outer iterations
};

// Gamma entries below this are treated as exact zeros by solve().
inline constexpr double kGammaFloor = 1e-12;

double eval_objective(const HyperState& state, const Matrix& y);

// Bound gradients. With symmetric = false the row quantities are left as
// zero matrices of the right shape.
GradientSet compute_gradients(const HyperState& state, bool symmetric = true);

// Closed-form minimizers of the bound. `lambda` is copied into the result.
HyperState update_hyperparams(const GradientSet& grads, const Matrix& z, const Matrix& e,
                              GammaUpdate variant, bool symmetric = true, double lambda = 0.0);

Decomposition solve(const Matrix& y, const SolverConfig& cfg = {});

// dL/dgamma_ij from the dense covariance (n*m <= kClosedFormMaxEntries):
//   [(S_c^j)^{-1}]_ii / 2 + [(S_r^i)^{-1}]_jj / 2 - (Sigma_y^{-1} y)_(i,j)^2.
double gamma_derivative(const HyperState& state, const Matrix& y, Eigen::Index i,
                        Eigen::Index j);

// gamma_derivative at a zero entry, i.e. the one-sided derivative at 0+.
// Throws DomainError when gamma_ij != 0.
double gamma_escape_derivative(const HyperState& state, const Matrix& y, Eigen::Index i,
                               Eigen::Index j);

}  // namespace rpca
