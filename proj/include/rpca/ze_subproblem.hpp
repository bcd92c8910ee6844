#pragma once

// The Z/E step of the outer loop: given hyperparameters, find
//   argmin_{Z,E}  sum e_ij^2 / gamma_ij + vec(Z)^T Sigma_z^+ vec(Z)
//                 + (1/lambda) ||Y - Z - E||_F^2,
// with Sigma_z = Psi_r (x) I + I (x) Psi_c. ze_closed_form forms the dense
// covariance and is for small instances; ze_admm is the general solver.

#include "rpca/hyper_state.hpp"

#include <optional>
#include <vector>

namespace rpca {

struct AdmmConfig {
  double mu0_scale = 1.25;     // mu_0 = mu0_scale / ||Y||_2
  double eta = 1.5;            // mu_{k+1} = min(mu_max, eta mu_k)
  double mu_max_scale = 1e10;  // mu_max = mu_max_scale * mu_0
  int inner_iters = 3;
  double tol = 1e-8;
  int max_iters = 500;
  bool record_merit = false;

  void validate() const;
};

// Iterate of the augmented-Lagrangian loop. `e` here is the constrained
// variable, i.e. the outlier part plus the noise share (see ze_admm).
struct AdmmState {
  Matrix z;
  Matrix e;
  Matrix q;
  double mu = 0.0;
};

struct AdmmResult {
  Matrix z;
  Matrix e;
  int iterations = 0;
  bool converged = false;
  double feasibility = 0.0;  // ||Y - Z - E'||_F / ||Y||_F at the returned iterate
  double z_change = 0.0;     // ||Z_k+1 - Z_k||^2 / ||Z_k||^2 at the returned iterate
  std::vector<double> merit;  // per step, when requested
};

// Dense solve. Requires n*m <= kClosedFormMaxEntries.
inline constexpr Eigen::Index kClosedFormMaxEntries = 400;

struct ZePair {
  Matrix z;
  Matrix e;
};

ZePair ze_closed_form(const HyperState& state, const Matrix& y);

// e_ij = (y - z + q/mu)_ij / (2/(mu gamma_ij) + 1), and 0 where gamma_ij = 0.
Matrix admm_e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu,
                     const Matrix& gamma);

// Solves (Psi_c + (2/mu) I) X + X Psi_r = Y - E + Q/mu and returns
// Psi_c X + X Psi_r.
Matrix admm_z_update(const Matrix& y, const Matrix& e, const Matrix& q, double mu,
                     const Matrix& psi_c, const Matrix& psi_r);

// ADMM on the constraint Y = Z + E'. The noise term is folded into the
// outlier penalty: minimizing e^2/gamma + n^2/lambda subject to e + n = e'
// gives e'^2/(gamma + lambda) with e = gamma/(gamma + lambda) e', so the
// loop runs with gamma + lambda and the returned E is rescaled. For
// lambda = 0 this is the plain constrained problem.
//
// Q starts at zero on every call. `warm_z`/`warm_e` seed Z and E.
AdmmResult ze_admm(const HyperState& state, const Matrix& y, const AdmmConfig& cfg,
                   const Matrix* warm_z = nullptr, const Matrix* warm_e = nullptr);

}  // namespace rpca
