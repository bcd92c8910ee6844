#include "rpca/baselines.hpp"

#include "rpca/errors.hpp"
#include "rpca/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace rpca {

namespace {

void require_nonzero(const Matrix& y, const char* who) {
  require_finite(y, who);
  if (y.size() == 0 || y.cwiseAbs().maxCoeff() == 0.0) {
    throw DomainError(std::string(who) + " needs a nonzero observation");
  }
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

// svt that also reports the nuclear norm of its output.
Matrix svt_norm(const Matrix& m, double tau, double* nuc) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
  const Vector s = (svd.singularValues().array() - tau).max(0.0).matrix();
  *nuc = s.sum();
  Eigen::Index k = 0;
  while (k < s.size() && s(k) > 0.0) ++k;
  if (k == 0) return Matrix::Zero(m.rows(), m.cols());
  return svd.matrixU().leftCols(k) * s.head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

}  // namespace

// ---------------------------------------------------------------------- PCP

PcpResult pcp_alm(const Matrix& y, double lambda_pcp, double tol, int max_iters) {
  require_nonzero(y, "pcp_alm");
  if (!(tol > 0.0) || max_iters < 1) throw DomainError("pcp_alm needs tol > 0, max_iters >= 1");
  const Eigen::Index n = y.rows(), m = y.cols();
  if (lambda_pcp <= 0.0) lambda_pcp = 1.0 / std::sqrt(static_cast<double>(std::max(n, m)));

  const double yfro = y.norm();
  double mu = 1.25 / spectral_norm(y);
  const double mu_max = 1e7 * mu;
  PcpResult r;
  r.z = Matrix::Zero(n, m);
  r.e = Matrix::Zero(n, m);
  r.q = Matrix::Zero(n, m);
  for (int k = 1; k <= max_iters; ++k) {
    r.z = svt(y - r.e + r.q / mu, 1.0 / mu);
    r.e = soft_threshold(y - r.z + r.q / mu, lambda_pcp / mu);
    const Matrix resid = y - r.z - r.e;
    r.q.noalias() += mu * resid;
    mu = std::min(mu_max, 1.5 * mu);
    r.iterations = k;
    if (resid.norm() / yfro < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// ----------------------------------------------------------------------- MC

McResult mc_alm(const Matrix& y, const SupportMask& omega, double tol, int max_iters) {
  require_finite(y, "mc_alm observation");
  if (omega.rows != y.rows() || omega.cols != y.cols()) {
    throw DimensionError("support mask shape disagrees with Y");
  }
  if (omega.observed.empty()) throw DomainError("mc_alm needs a nonempty support");
  if (!(tol > 0.0) || max_iters < 1) throw DomainError("mc_alm needs tol > 0, max_iters >= 1");

  const Matrix mask = omega.indicator();
  const Matrix unobs = Matrix::Ones(y.rows(), y.cols()) - mask;
  const Matrix d = y.cwiseProduct(mask);
  McResult r;
  r.z = Matrix::Zero(y.rows(), y.cols());
  const double dn = spectral_norm(d);
  if (dn == 0.0) {
    r.converged = true;
    return r;
  }
  double mu = 1.25 / dn;
  const double mu_max = 1e10 * mu;
  Matrix e = Matrix::Zero(y.rows(), y.cols());
  Matrix q = Matrix::Zero(y.rows(), y.cols());
  for (int k = 1; k <= max_iters; ++k) {
    r.z = svt(d - e + q / mu, 1.0 / mu);
    e = (d - r.z + q / mu).cwiseProduct(unobs);
    const Matrix resid = d - r.z - e;
    q.noalias() += mu * resid;
    mu = std::min(mu_max, 1.2 * mu);
    r.iterations = k;
    r.max_violation = (r.z - y).cwiseProduct(mask).cwiseAbs().maxCoeff();
    if (r.max_violation < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// --------------------------------------------------------- regularized PCP

double regularized_pcp_objective(const Matrix& y, const Matrix& z, const Matrix& e,
                                 double lambda) {
  require_same_shape(z, y, "regularized objective Z");
  require_same_shape(e, y, "regularized objective E");
  const double n = static_cast<double>(y.rows());
  return (y - z - e).squaredNorm() / (2.0 * lambda) + std::sqrt(n) * nuclear_norm(z) +
         e.cwiseAbs().sum();
}

RegularizedPcpResult regularized_pcp(const Matrix& y, double lambda, double tol, int max_iters) {
  require_square(y, "regularized_pcp observation");
  require_finite(y, "regularized_pcp observation");
  if (!(lambda > 0.0)) throw DomainError("regularized_pcp needs lambda > 0");
  const Eigen::Index n = y.rows();
  const double tau = lambda * std::sqrt(static_cast<double>(n));

  RegularizedPcpResult r;
  r.z = Matrix::Zero(n, n);
  r.e = Matrix::Zero(n, n);
  r.objective = y.squaredNorm() / (2.0 * lambda);
  r.objective_trace.push_back(r.objective);
  if (r.objective == 0.0) {
    r.converged = true;
    return r;
  }
  for (int k = 1; k <= max_iters; ++k) {
    double nuc = 0.0;
    r.z = svt_norm(y - r.e, tau, &nuc);
    r.e = soft_threshold(y - r.z, lambda);
    const double f = (y - r.z - r.e).squaredNorm() / (2.0 * lambda) +
                     std::sqrt(static_cast<double>(n)) * nuc + r.e.cwiseAbs().sum();
    r.objective_trace.push_back(f);
    const double drop = r.objective - f;
    r.objective = f;
    r.iterations = k;
    if (drop <= tol * std::abs(f)) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// ------------------------------------------------------------ trace variant

double collapsed_trace_objective(const Matrix& y, const Matrix& z_c, const Matrix& z_r,
                                 const Matrix& e, double lambda) {
  const double sn = std::sqrt(static_cast<double>(y.rows()));
  return (y - z_c - z_r - e).squaredNorm() / (2.0 * lambda * sn) + nuclear_norm(z_c) +
         nuclear_norm(z_r) + e.cwiseAbs().sum() / sn;
}

namespace {

struct Split {
  Matrix z_c, z_r, e;
};

// One round of the alternation: closed-form hyperparameters from (Z_c, Z_r,
// E), then the quadratic minimizer over (Z_c, Z_r, E) for them.
void closure_round(const Matrix& y, double lambda, TraceVariantState& s, double* quad_out) {
  const Eigen::Index n = y.rows();
  const double dn = static_cast<double>(n);
  s.psi_c = psd_sqrt(symmetrized(s.z_c * s.z_c.transpose()) / dn);
  s.psi_r = psd_sqrt(symmetrized(s.z_r.transpose() * s.z_r) / dn);
  s.gamma = s.e.cwiseAbs();

  const KronSumOperator sigma{s.psi_c, s.psi_r, s.gamma, lambda};
  Eigen::LLT<Matrix> llt(sigma.dense());
  if (llt.info() != Eigen::Success) throw NumericalError("trace variant covariance is singular");
  const Matrix w = unvec(llt.solve(vec(y)), n, n);
  s.z_c = s.psi_c * w;
  s.z_r = w * s.psi_r;
  s.e = s.gamma.cwiseProduct(w);
  *quad_out = y.cwiseProduct(w).sum();
}

double fixed_point_residual(const Matrix& psi, const Matrix& target) {
  const double base = psi.norm();
  const double d = (psi - target).norm();
  return base > 0.0 ? d / base : d;
}

}  // namespace

TraceVariantResult trace_variant_solve(const Matrix& y, double lambda, double tol, int max_iters,
                                       int closure_rounds) {
  require_square(y, "trace_variant_solve observation");
  require_finite(y, "trace_variant_solve observation");
  if (!(lambda > 0.0)) throw DomainError("trace_variant_solve needs lambda > 0");
  if (closure_rounds < 1) throw DomainError("closure_rounds must be >= 1");
  const Eigen::Index n = y.rows();
  if (n * n > kTraceVariantMaxEntries) {
    throw DimensionError("trace_variant_solve limited to n*n <= " +
                         std::to_string(kTraceVariantMaxEntries));
  }
  const double dn = static_cast<double>(n), sn = std::sqrt(dn);

  TraceVariantResult out;
  TraceVariantState& s = out.state;
  s.z_c = s.z_r = s.e = Matrix::Zero(n, n);
  s.psi_c = s.psi_r = s.gamma = Matrix::Zero(n, n);
  if (y.cwiseAbs().maxCoeff() == 0.0) {
    out.converged = true;
    return out;
  }

  // Stage one. The smooth part (1/(2 lambda sqrt n))||Y - Z_c - Z_r - E||^2
  // has a 3/(lambda sqrt n)-Lipschitz gradient in the stacked variable.
  const double step = lambda * sn / 3.0;
  Split x{s.z_c, s.z_r, s.e};
  Split v = x;
  double theta = 1.0;
  double f = collapsed_trace_objective(y, x.z_c, x.z_r, x.e, lambda);
  for (int k = 1; k <= max_iters; ++k) {
    const Matrix g = -(y - v.z_c - v.z_r - v.e) / (lambda * sn);
    double nc = 0.0, nr = 0.0;
    Split xn;
    xn.z_c = svt_norm(v.z_c - step * g, step, &nc);
    xn.z_r = svt_norm(v.z_r - step * g, step, &nr);
    xn.e = soft_threshold(v.e - step * g, step / sn);
    const double fn = (y - xn.z_c - xn.z_r - xn.e).squaredNorm() / (2.0 * lambda * sn) + nc + nr +
                      xn.e.cwiseAbs().sum() / sn;
    out.iterations = k;
    if (fn > f) {
      // Objective went up: drop momentum and retry from the last iterate.
      theta = 1.0;
      v = x;
      continue;
    }
    const double theta_n = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = (theta - 1.0) / theta_n;
    v.z_c = xn.z_c + beta * (xn.z_c - x.z_c);
    v.z_r = xn.z_r + beta * (xn.z_r - x.z_r);
    v.e = xn.e + beta * (xn.e - x.e);
    x = std::move(xn);
    theta = theta_n;
    const double drop = f - fn;
    f = fn;
    if (k > 5 && drop <= tol * std::abs(fn)) {
      out.converged = true;
      break;
    }
  }
  s.z_c = x.z_c;
  s.z_r = x.z_r;
  s.e = x.e;

  // Stage two.
  double quad = 0.0;
  for (int r = 0; r < closure_rounds; ++r) closure_round(y, lambda, s, &quad);

  out.fixed_point_residual_c =
      fixed_point_residual(s.psi_c, psd_sqrt(symmetrized(s.z_c * s.z_c.transpose()) / dn));
  out.fixed_point_residual_r =
      fixed_point_residual(s.psi_r, psd_sqrt(symmetrized(s.z_r.transpose() * s.z_r) / dn));
  out.collapsed_objective = collapsed_trace_objective(y, s.z_c, s.z_r, s.e, lambda);
  out.objective = sn * out.collapsed_objective;
  out.covariance_objective =
      0.5 * (quad + dn * s.psi_c.trace() + dn * s.psi_r.trace() + s.gamma.sum());
  return out;
}

}  // namespace rpca
