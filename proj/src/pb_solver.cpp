#include "rpca/pb_solver.hpp"

#include "rpca/errors.hpp"
#include "rpca/kernels.hpp"
#include "rpca/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace rpca {

std::string_view to_string(GammaUpdate v) {
  switch (v) {
    case GammaUpdate::PaperLiteral:
      return "paper";
    case GammaUpdate::ESquaredPlusU:
      return "esq";
    case GammaUpdate::ESquaredPlusUHalved:
      return "esq-half";
  }
  return "?";
}

GammaUpdate parse_gamma_update(std::string_view s) {
  if (s == "paper") return GammaUpdate::PaperLiteral;
  if (s == "esq") return GammaUpdate::ESquaredPlusU;
  if (s == "esq-half") return GammaUpdate::ESquaredPlusUHalved;
  throw DomainError("unknown gamma variant '" + std::string(s) + "'");
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be >= 0");
  if (max_outer_iters < 1) throw DomainError("max_outer_iters must be >= 1");
  if (!(outer_tol > 0.0)) throw DomainError("outer_tol must be positive");
  admm.validate();
}

double eval_objective(const HyperState& state, const Matrix& y) {
  state.validate();
  require_same_shape(y, state.gamma, "eval_objective observation");
  const KronSumOperator sigma{state.psi_c, state.psi_r, state.gamma, state.lambda};
  const Matrix x = cg_solve(sigma, y);
  // 2<y,x> - <x, Sigma x> differs from y^T Sigma^{-1} y only to second
  // order in the CG residual.
  const double quad = 2.0 * y.cwiseProduct(x).sum() -
                      x.cwiseProduct(kernels::parallel::kron_apply(sigma, x)).sum();
  const double ld_c = kernels::parallel::slice_logdet_sum(state.psi_c, state.gamma, state.lambda);
  const Matrix gt = state.gamma.transpose();
  const double ld_r = kernels::parallel::slice_logdet_sum(state.psi_r, gt, state.lambda);
  return quad + ld_c + ld_r;
}

namespace {

kernels::SliceGradients named_slices(const Matrix& psi, const Matrix& gamma, double lambda,
                                     const char* side) {
  try {
    return kernels::parallel::slice_gradients(psi, gamma, lambda);
  } catch (const CholeskyError& e) {
    throw CholeskyError(std::string("S_") + side + " for " + (side[0] == 'c' ? "column " : "row ") +
                            std::to_string(e.slice()) + " is singular (pivot " +
                            std::to_string(e.pivot()) + ")",
                        e.pivot(), e.slice());
  }
}

}  // namespace

GradientSet compute_gradients(const HyperState& state, bool symmetric) {
  state.validate();
  const Eigen::Index n = state.rows(), m = state.cols();
  GradientSet g;
  kernels::SliceGradients c = named_slices(state.psi_c, state.gamma, state.lambda, "c");
  g.g_c = std::move(c.g);
  g.u_c = std::move(c.u);
  if (symmetric) {
    kernels::SliceGradients r =
        named_slices(state.psi_r, state.gamma.transpose(), state.lambda, "r");
    g.g_r = std::move(r.g);
    g.u_r = r.u.transpose();
  } else {
    g.g_r = Matrix::Zero(m, m);
    g.u_r = Matrix::Zero(n, m);
  }
  return g;
}

HyperState update_hyperparams(const GradientSet& grads, const Matrix& z, const Matrix& e,
                              GammaUpdate variant, bool symmetric, double lambda) {
  require_same_shape(e, z, "update_hyperparams E");
  require_same_shape(grads.u_c, z, "update_hyperparams u_c");
  const Eigen::Index n = z.rows(), m = z.cols();
  if (grads.g_c.rows() != n || grads.g_c.cols() != n) {
    throw DimensionError("update_hyperparams g_c has wrong shape");
  }
  HyperState s;
  s.lambda = lambda;
  s.psi_c = symmetrized(grads.g_c.transpose() + z * z.transpose()) / static_cast<double>(m);
  Matrix u = grads.u_c;
  if (symmetric) {
    require_same_shape(grads.u_r, z, "update_hyperparams u_r");
    if (grads.g_r.rows() != m || grads.g_r.cols() != m) {
      throw DimensionError("update_hyperparams g_r has wrong shape");
    }
    s.psi_r = symmetrized(grads.g_r.transpose() + z.transpose() * z) / static_cast<double>(n);
    u += grads.u_r;
  } else {
    s.psi_r = Matrix::Zero(m, m);
  }
  switch (variant) {
    case GammaUpdate::PaperLiteral:
      s.gamma = z.array().square().matrix() + u;
      break;
    case GammaUpdate::ESquaredPlusU:
      s.gamma = e.array().square().matrix() + u;
      break;
    case GammaUpdate::ESquaredPlusUHalved:
      s.gamma = 0.5 * (e.array().square().matrix() + u);
      break;
  }
  // u can dip a hair below zero through rounding.
  s.gamma = s.gamma.cwiseMax(0.0);
  return s;
}

namespace {

double rel_change(const Matrix& next, const Matrix& prev) {
  const double d = (next - prev).norm();
  const double base = next.norm();
  if (base > 0.0) return d / base;
  return d > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

Decomposition solve(const Matrix& y, const SolverConfig& cfg) {
  cfg.validate();
  require_finite(y, "observation");
  const Eigen::Index n = y.rows(), m = y.cols();
  Decomposition out;
  out.z = Matrix::Zero(n, m);
  out.e = Matrix::Zero(n, m);
  if (y.size() == 0 || y.cwiseAbs().maxCoeff() == 0.0) {
    out.outer_iters = 1;
    out.converged = true;
    if (cfg.objective_tracking) out.objective_trace.push_back(0.0);
    return out;
  }

  HyperState state = HyperState::initial(n, m, cfg.lambda, cfg.symmetric);
  if (cfg.objective_tracking) out.objective_trace.push_back(eval_objective(state, y));

  for (int t = 1; t <= cfg.max_outer_iters; ++t) {
    AdmmResult ze;
    GradientSet grads;
    try {
      ze = t == 1 ? ze_admm(state, y, cfg.admm) : ze_admm(state, y, cfg.admm, &out.z, &out.e);
      grads = compute_gradients(state, cfg.symmetric);
    } catch (const NumericalError& err) {
      throw NumericalError("outer iteration " + std::to_string(t) + ": " + err.what());
    }
    out.admm_iters += ze.iterations;

    state = update_hyperparams(grads, ze.z, ze.e, cfg.gamma_update, cfg.symmetric, cfg.lambda);
    for (Eigen::Index k = 0; k < state.gamma.size(); ++k) {
      if (state.gamma.data()[k] < kGammaFloor) {
        state.gamma.data()[k] = 0.0;
        ze.e.data()[k] = 0.0;
      }
    }

    const double change = std::max(rel_change(ze.z, out.z), rel_change(ze.e, out.e));
    out.z = std::move(ze.z);
    out.e = std::move(ze.e);
    out.outer_iters = t;

    if (cfg.observer) cfg.observer(IterationInfo{t, state, out.z, out.e, ze});
    if (cfg.objective_tracking) {
      try {
        out.objective_trace.push_back(eval_objective(state, y));
      } catch (const NumericalError& err) {
        throw NumericalError("objective at outer iteration " + std::to_string(t) + ": " +
                             err.what());
      }
    }
    if (change < cfg.outer_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double gamma_derivative(const HyperState& state, const Matrix& y, Eigen::Index i,
                        Eigen::Index j) {
  state.validate();
  require_same_shape(y, state.gamma, "gamma_derivative observation");
  if (y.size() > kClosedFormMaxEntries) {
    throw DimensionError("gamma_derivative limited to n*m <= " +
                         std::to_string(kClosedFormMaxEntries));
  }
  if (i < 0 || j < 0 || i >= y.rows() || j >= y.cols()) {
    throw DimensionError("gamma_derivative index out of range");
  }
  const Eigen::Index n = y.rows(), m = y.cols();
  const KronSumOperator sigma{state.psi_c, state.psi_r, state.gamma, state.lambda};
  Eigen::LLT<Matrix> llt(sigma.dense());
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma_y is not positive definite");
  const Vector w = llt.solve(vec(y));

  Matrix sc = state.psi_c;
  sc.diagonal().array() += 0.5 * state.gamma.col(j).array() + 0.5 * state.lambda;
  Matrix sr = state.psi_r;
  sr.diagonal().array() += 0.5 * state.gamma.row(i).transpose().array() + 0.5 * state.lambda;
  Eigen::LLT<Matrix> lc(sc), lr(sr);
  if (lc.info() != Eigen::Success) throw CholeskyError("S_c singular", -1, static_cast<int>(j));
  if (lr.info() != Eigen::Success) throw CholeskyError("S_r singular", -1, static_cast<int>(i));
  const Vector ec = Vector::Unit(n, i), er = Vector::Unit(m, j);
  const double dc = ec.dot(lc.solve(ec));
  const double dr = er.dot(lr.solve(er));
  const double wij = w(i + j * n);
  return 0.5 * dc + 0.5 * dr - wij * wij;
}

double gamma_escape_derivative(const HyperState& state, const Matrix& y, Eigen::Index i,
                               Eigen::Index j) {
  if (i < 0 || j < 0 || i >= state.gamma.rows() || j >= state.gamma.cols()) {
    throw DimensionError("gamma_escape_derivative index out of range");
  }
  if (state.gamma(i, j) != 0.0) throw DomainError("gamma_escape_derivative needs gamma_ij = 0");
  return gamma_derivative(state, y, i, j);
}

}  // namespace rpca
