#include "rpca/ze_subproblem.hpp"

#include "rpca/errors.hpp"
#include "rpca/kernels.hpp"
#include "rpca/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace rpca {

void AdmmConfig::validate() const {
  if (!(mu0_scale > 0.0)) throw DomainError("mu0_scale must be positive");
  if (!(eta > 1.0)) throw DomainError("eta must exceed 1");
  if (!(mu_max_scale >= 1.0)) throw DomainError("mu_max_scale must be >= 1");
  if (inner_iters < 1) throw DomainError("inner_iters must be >= 1");
  if (!(tol > 0.0)) throw DomainError("ADMM tol must be positive");
  if (max_iters < 1) throw DomainError("ADMM max_iters must be >= 1");
}

ZePair ze_closed_form(const HyperState& state, const Matrix& y) {
  state.validate();
  require_same_shape(y, state.gamma, "ze_closed_form observation");
  require_finite(y, "observation");
  if (y.size() > kClosedFormMaxEntries) {
    throw DimensionError("ze_closed_form limited to n*m <= " +
                         std::to_string(kClosedFormMaxEntries));
  }
  const KronSumOperator sigma{state.psi_c, state.psi_r, state.gamma, state.lambda};
  const Matrix dense = sigma.dense();
  Eigen::LLT<Matrix> llt(dense);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma_y is not positive definite");
  const Matrix w = unvec(llt.solve(vec(y)), y.rows(), y.cols());
  ZePair out;
  out.z = kernels::serial::kron_apply(
      KronSumOperator{state.psi_c, state.psi_r, Matrix::Zero(y.rows(), y.cols()), 0.0}, w);
  out.e = state.gamma.cwiseProduct(w);
  return out;
}

Matrix admm_e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu,
                     const Matrix& gamma) {
  require_same_shape(z, y, "admm_e_update z");
  require_same_shape(q, y, "admm_e_update q");
  require_same_shape(gamma, y, "admm_e_update gamma");
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  return kernels::parallel::e_update(y, z, q, mu, gamma);
}

Matrix admm_z_update(const Matrix& y, const Matrix& e, const Matrix& q, double mu,
                     const Matrix& psi_c, const Matrix& psi_r) {
  require_same_shape(e, y, "admm_z_update e");
  require_same_shape(q, y, "admm_z_update q");
  if (psi_c.rows() != y.rows() || psi_r.rows() != y.cols()) {
    throw DimensionError("admm_z_update covariance shapes disagree with Y");
  }
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  const SylvesterSolver syl(psi_c, psi_r);
  return syl.solve_and_apply(y - e + q / mu, 2.0 / mu);
}

AdmmResult ze_admm(const HyperState& state, const Matrix& y, const AdmmConfig& cfg,
                   const Matrix* warm_z, const Matrix* warm_e) {
  cfg.validate();
  state.validate();
  require_same_shape(y, state.gamma, "ze_admm observation");
  require_finite(y, "observation");
  const double ynorm2 = spectral_norm(y);
  if (!(ynorm2 > 0.0)) throw DomainError("ze_admm needs a nonzero observation");
  const double yfro = y.norm();

  const Eigen::Index n = y.rows(), m = y.cols();
  const Matrix gamma_aug = (state.gamma.array() + state.lambda).matrix();
  const SylvesterSolver syl(state.psi_c, state.psi_r);

  AdmmState st;
  st.z = warm_z ? *warm_z : Matrix::Zero(n, m);
  st.e = Matrix::Zero(n, m);
  if (warm_e) {
    require_same_shape(*warm_e, y, "ze_admm warm E");
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      const double g = state.gamma.data()[k];
      st.e.data()[k] = g > 0.0 ? warm_e->data()[k] * gamma_aug.data()[k] / g : 0.0;
    }
  }
  require_same_shape(st.z, y, "ze_admm warm Z");
  st.q = Matrix::Zero(n, m);
  st.mu = cfg.mu0_scale / ynorm2;
  const double mu_max = cfg.mu_max_scale * st.mu;

  AdmmResult best;
  double best_score = std::numeric_limits<double>::infinity();
  Matrix x;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Matrix z_prev = st.z;
    for (int t = 0; t < cfg.inner_iters; ++t) {
      st.z = syl.solve_and_apply(y - st.e + st.q / st.mu, 2.0 / st.mu,
                                 cfg.record_merit ? &x : nullptr);
      st.e = kernels::parallel::e_update(y, st.z, st.q, st.mu, gamma_aug);
    }
    const Matrix resid = y - st.z - st.e;
    st.q.noalias() += st.mu * resid;
    st.mu = std::min(mu_max, cfg.eta * st.mu);

    const double feas = resid.norm() / yfro;
    const double zp = z_prev.squaredNorm();
    const double dz = (st.z - z_prev).squaredNorm();
    const double zchg = zp > 0.0 ? dz / zp : (dz > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (cfg.record_merit) {
      double pen = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double g = gamma_aug.data()[i];
        if (g > 0.0) pen += st.e.data()[i] * st.e.data()[i] / g;
      }
      best.merit.push_back(pen + st.z.cwiseProduct(x).sum());
    }

    const double score = std::max(feas, zchg);
    if (score < best_score || score < cfg.tol) {
      best_score = score;
      best.z = st.z;
      best.e = st.e;
      best.iterations = k;
      best.feasibility = feas;
      best.z_change = zchg;
    }
    if (score < cfg.tol) {
      best.converged = true;
      break;
    }
  }
  if (!best.converged) best.iterations = cfg.max_iters;

  // E' -> E: the outlier share of the constrained residual.
  if (state.lambda > 0.0) {
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      const double g = state.gamma.data()[k];
      best.e.data()[k] = g > 0.0 ? best.e.data()[k] * g / gamma_aug.data()[k] : 0.0;
    }
  }
  return best;
}

}  // namespace rpca
