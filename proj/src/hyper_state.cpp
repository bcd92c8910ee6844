#include "rpca/hyper_state.hpp"

#include "rpca/errors.hpp"
#include "rpca/linalg.hpp"

#include <cmath>
#include <string>

namespace rpca {

HyperState HyperState::initial(Eigen::Index n, Eigen::Index m, double lambda, bool symmetric) {
  HyperState s;
  s.psi_c = Matrix::Identity(n, n);
  s.psi_r = symmetric ? Matrix(Matrix::Identity(m, m)) : Matrix(Matrix::Zero(m, m));
  s.gamma = Matrix::Ones(n, m);
  s.lambda = lambda;
  return s;
}

void HyperState::validate() const {
  require_square(psi_c, "psi_c");
  require_square(psi_r, "psi_r");
  if (psi_c.rows() != gamma.rows() || psi_r.rows() != gamma.cols()) {
    throw DimensionError("hyper state shapes disagree: psi_c " + std::to_string(psi_c.rows()) +
                         ", psi_r " + std::to_string(psi_r.rows()) + ", gamma " +
                         std::to_string(gamma.rows()) + "x" + std::to_string(gamma.cols()));
  }
  require_finite(psi_c, "psi_c");
  require_finite(psi_r, "psi_r");
  require_finite(gamma, "gamma");
  if (gamma.size() > 0 && gamma.minCoeff() < 0.0) throw DomainError("gamma has negative entries");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be >= 0");
}

void HyperState::validate_psd(double tol) const {
  validate();
  if (psi_c.size() > 0 && min_eigenvalue(psi_c) < -tol) throw DomainError("psi_c is not PSD");
  if (psi_r.size() > 0 && min_eigenvalue(psi_r) < -tol) throw DomainError("psi_r is not PSD");
}

}  // namespace rpca
