#include "rpca/linalg.hpp"

#include "rpca/errors.hpp"
#include "rpca/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace rpca {

namespace {

// Unblocked Cholesky used only to locate the failing pivot after the fast
// path has already reported breakdown.
int failing_pivot(const Matrix& s) {
  const Eigen::Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return static_cast<int>(j);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return static_cast<int>(n) - 1;
}

}  // namespace

SymEig sym_eig(const Matrix& s) {
  require_square(s, "sym_eig input");
  const double scale = s.norm();
  if ((s - s.transpose()).norm() > 1e-12 * scale) {
    throw DimensionError("sym_eig input is not symmetric");
  }
  if (!s.allFinite()) throw DomainError("sym_eig input contains non-finite entries");
  SymEig out;
  if (s.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(s));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  out.eigenvalues = es.eigenvalues();
  out.vectors = es.eigenvectors();
#ifndef NDEBUG
  const Eigen::Index n = s.rows();
  const double ortho =
      (out.vectors.transpose() * out.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  const Matrix rec = out.vectors * out.eigenvalues.asDiagonal() * out.vectors.transpose();
  if (ortho > 1e-10 || (rec - symmetrized(s)).norm() > 1e-8 * std::max(scale, 1e-300)) {
    throw NumericalError("sym_eig invariants violated");
  }
#endif
  return out;
}

double chol_logdet(const Matrix& s) {
  require_square(s, "chol_logdet input");
  if (s.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().diagonal().allFinite()) {
    const int p = failing_pivot(s);
    throw CholeskyError("Cholesky breakdown at pivot " + std::to_string(p), p);
  }
  const auto d = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw CholeskyError("Cholesky breakdown at pivot " + std::to_string(i), static_cast<int>(i));
    }
  }
  return 2.0 * d.array().log().sum();
}

Matrix svt(const Matrix& m, double tau) {
  if (tau < 0.0) throw DomainError("svt threshold must be nonnegative");
  if (m.size() == 0) return m;
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed in svt");
  const Vector s = (svd.singularValues().array() - tau).max(0.0).matrix();
  Eigen::Index k = 0;
  while (k < s.size() && s(k) > 0.0) ++k;
  if (k == 0) return Matrix::Zero(m.rows(), m.cols());
  return svd.matrixU().leftCols(k) * s.head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

Matrix soft_threshold(const Matrix& m, double tau) {
  if (tau < 0.0) throw DomainError("soft threshold must be nonnegative");
  return kernels::parallel::soft_threshold(m, tau);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed in spectral_norm");
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------- Sylvester

SylvesterSolver::SylvesterSolver(const Matrix& a, const Matrix& b)
    : a_(sym_eig(a)), b_(sym_eig(b)) {}

Matrix SylvesterSolver::pair_sums(double shift) const {
  const Eigen::Index n = rows(), m = cols();
  Matrix d(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    d.col(j) = (a_.eigenvalues.array() + (shift + b_.eigenvalues(j))).matrix();
  }
  if (d.size() > 0) {
    const double lo = d.minCoeff();
    if (!(lo > kSylvesterMinPairSum)) {
      throw SingularSystemError("Sylvester system near-singular, minimal eigenvalue-pair sum " +
                                    std::to_string(lo),
                                lo);
    }
  }
  return d;
}

Matrix SylvesterSolver::solve(const Matrix& c, double shift) const {
  if (c.rows() != rows() || c.cols() != cols()) {
    throw DimensionError("Sylvester right-hand side has wrong shape");
  }
  const Matrix d = pair_sums(shift);
  const Matrix ch = a_.vectors.transpose() * c * b_.vectors;
  return a_.vectors * ch.cwiseQuotient(d) * b_.vectors.transpose();
}

Matrix SylvesterSolver::apply(const Matrix& x) const {
  if (x.rows() != rows() || x.cols() != cols()) {
    throw DimensionError("Sylvester operand has wrong shape");
  }
  return a_.vectors * (a_.vectors.transpose() * x * b_.vectors).cwiseProduct(pair_sums_raw()) *
         b_.vectors.transpose();
}

Matrix SylvesterSolver::pair_sums_raw() const {
  const Eigen::Index n = rows(), m = cols();
  Matrix d(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    d.col(j) = (a_.eigenvalues.array() + b_.eigenvalues(j)).matrix();
  }
  return d;
}

Matrix SylvesterSolver::solve_and_apply(const Matrix& c, double shift, Matrix* x_out) const {
  if (c.rows() != rows() || c.cols() != cols()) {
    throw DimensionError("Sylvester right-hand side has wrong shape");
  }
  const Matrix d = pair_sums(shift);
  const Matrix xh = (a_.vectors.transpose() * c * b_.vectors).cwiseQuotient(d);
  if (x_out) *x_out = a_.vectors * xh * b_.vectors.transpose();
  return a_.vectors * xh.cwiseProduct(pair_sums_raw()) * b_.vectors.transpose();
}

Matrix solve_sylvester_spd(const Matrix& a, const Matrix& b, const Matrix& c, double shift) {
  if (shift < 0.0) throw DomainError("Sylvester shift must be nonnegative");
  return SylvesterSolver(a, b).solve(c, shift);
}

// ------------------------------------------------------------- Kronecker sum

void KronSumOperator::validate() const {
  require_square(psi_c, "psi_c");
  require_square(psi_r, "psi_r");
  if (gamma.rows() != psi_c.rows() || gamma.cols() != psi_r.rows()) {
    throw DimensionError("gamma must be " + std::to_string(psi_c.rows()) + "x" +
                         std::to_string(psi_r.rows()));
  }
  require_finite(psi_c, "psi_c");
  require_finite(psi_r, "psi_r");
  require_finite(gamma, "gamma");
  if (gamma.size() > 0 && gamma.minCoeff() < 0.0) throw DomainError("gamma has negative entries");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be >= 0");
}

Matrix KronSumOperator::dense() const {
  validate();
  const Eigen::Index n = rows(), m = cols(), nm = n * m;
  Matrix s = Matrix::Zero(nm, nm);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index jp = 0; jp < m; ++jp) {
      const double r = psi_r(j, jp);
      for (Eigen::Index i = 0; i < n; ++i) s(i + j * n, i + jp * n) += r;
    }
    s.block(j * n, j * n, n, n) += psi_c;
  }
  for (Eigen::Index k = 0; k < nm; ++k) s(k, k) += gamma.data()[k] + lambda;
  return s;
}

Matrix KronSumOperator::diagonal() const {
  Matrix d = gamma.array() + lambda;
  d.colwise() += psi_c.diagonal();
  d.rowwise() += psi_r.diagonal().transpose();
  return d;
}

Matrix kron_apply(const KronSumOperator& op, const Matrix& v) {
  op.validate();
  if (v.rows() != op.rows() || v.cols() != op.cols()) {
    throw DimensionError("kron_apply operand has wrong shape");
  }
  return kernels::parallel::kron_apply(op, v);
}

Matrix cg_solve(const KronSumOperator& op, const Matrix& rhs, double tol, int max_iters,
                const Matrix* x0) {
  op.validate();
  if (rhs.rows() != op.rows() || rhs.cols() != op.cols()) {
    throw DimensionError("cg_solve right-hand side has wrong shape");
  }
  if (!(tol > 0.0)) throw DomainError("cg_solve tolerance must be positive");
  if (!(op.lambda > 0.0) && !(op.gamma.size() == 0 || op.gamma.minCoeff() > 0.0)) {
    throw DomainError("cg_solve needs lambda > 0 or strictly positive gamma");
  }
  const Eigen::Index nm = rhs.size();
  if (max_iters <= 0) max_iters = static_cast<int>(std::max<Eigen::Index>(4 * nm, 1));

  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return Matrix::Zero(rhs.rows(), rhs.cols());
  const double target = tol * bnorm;

  const Matrix dinv = op.diagonal().cwiseInverse();
  Matrix x = x0 ? *x0 : Matrix::Zero(rhs.rows(), rhs.cols());
  require_same_shape(x, rhs, "cg_solve warm start");
  Matrix r = rhs - kernels::parallel::kron_apply(op, x);
  double rnorm = r.norm();
  if (rnorm <= target) return x;
  Matrix zv = dinv.cwiseProduct(r);
  Matrix p = zv;
  double rz = r.cwiseProduct(zv).sum();

  for (int it = 1; it <= max_iters; ++it) {
    const Matrix ap = kernels::parallel::kron_apply(op, p);
    const double pap = p.cwiseProduct(ap).sum();
    if (!(pap > 0.0)) {
      throw NumericalError("cg_solve: operator not positive definite along search direction");
    }
    const double alpha = rz / pap;
    x.noalias() += alpha * p;
    // Periodic residual replacement keeps the recurrence honest.
    if (it % 50 == 0) {
      r = rhs - kernels::parallel::kron_apply(op, x);
    } else {
      r.noalias() -= alpha * ap;
    }
    rnorm = r.norm();
    if (rnorm <= target) {
      const Matrix rt = rhs - kernels::parallel::kron_apply(op, x);
      rnorm = rt.norm();
      if (rnorm <= target) return x;
      r = rt;
    }
    zv = dinv.cwiseProduct(r);
    const double rz_new = r.cwiseProduct(zv).sum();
    p = zv + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw NonConvergenceError("cg_solve reached its iteration cap", max_iters, rnorm / bnorm);
}

Matrix psd_sqrt(const Matrix& s) {
  const SymEig e = sym_eig(s);
  const Vector r = e.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return symmetrized(e.vectors * r.asDiagonal() * e.vectors.transpose());
}

double min_eigenvalue(const Matrix& s) {
  const SymEig e = sym_eig(s);
  return e.eigenvalues.size() ? e.eigenvalues(0) : 0.0;
}

}  // namespace rpca
