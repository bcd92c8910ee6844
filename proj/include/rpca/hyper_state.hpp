#pragma once

#include "rpca/matrix.hpp"

namespace rpca {

// Variational parameters of the pseudo-Bayesian objective for an n x m
// observation: column covariance psi_c (n x n), row covariance psi_r
// (m x m), outlier variances gamma (n x m) and noise variance lambda.
struct HyperState {
  Matrix psi_c;
  Matrix psi_r;
  Matrix gamma;
  double lambda = 0.0;

  Eigen::Index rows() const { return gamma.rows(); }
  Eigen::Index cols() const { return gamma.cols(); }

  // Psi_c = I, Psi_r = I (or 0 when !symmetric), Gamma = 1.
  static HyperState initial(Eigen::Index n, Eigen::Index m, double lambda, bool symmetric = true);

  // Shapes, finiteness, gamma >= 0, lambda >= 0.
  void validate() const;

  // validate() plus min-eigenvalue >= -tol for both covariances.
  void validate_psd(double tol = 1e-10) const;
};

}  // namespace rpca
