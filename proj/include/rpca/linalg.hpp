#pragma once

// Dense kernels shared by every solver: symmetric eigendecomposition,
// Cholesky log-determinants, proximal operators, the symmetric Sylvester
// solve and the matrix-free Kronecker-sum covariance operator.

#include "rpca/matrix.hpp"

namespace rpca {

struct SymEig {
  Vector eigenvalues;  // ascending
  Matrix vectors;      // orthonormal, columns are eigenvectors
};

// Eigendecomposition of a symmetric matrix. The input is symmetrized as
// (S + S^T)/2 before factoring; asymmetry beyond 1e-12 relative (Frobenius)
// is rejected with DimensionError.
SymEig sym_eig(const Matrix& s);

// log|S| for symmetric positive-definite S. Throws CholeskyError carrying the
// failing pivot when S is not numerically PD.
double chol_logdet(const Matrix& s);

// Singular-value soft thresholding: U * max(S - tau, 0) * V^T.
Matrix svt(const Matrix& m, double tau);

// Entrywise sign(x) * max(|x| - tau, 0).
Matrix soft_threshold(const Matrix& m, double tau);

// Largest singular value.
double spectral_norm(const Matrix& m);

// Smallest eigenvalue-pair sum accepted by the Sylvester solvers.
inline constexpr double kSylvesterMinPairSum = 1e-14;

// Solves (A + shift*I) X + X B = C for symmetric PSD A (n x n) and B (m x m)
// by diagonalizing both coefficients:
//   X = U_a [ (U_a^T C U_b)_ij / (alpha_i + shift + beta_j) ] U_b^T.
// Throws SingularSystemError when some alpha_i + shift + beta_j falls below
// kSylvesterMinPairSum.
Matrix solve_sylvester_spd(const Matrix& a, const Matrix& b, const Matrix& c, double shift);

// Factor-once form of solve_sylvester_spd. Both coefficient matrices are
// diagonalized at construction; every solve is four n*m*(n+m) products.
class SylvesterSolver {
 public:
  SylvesterSolver(const Matrix& a, const Matrix& b);

  Matrix solve(const Matrix& c, double shift) const;

  // Applies X -> A X + X B through the factored form.
  Matrix apply(const Matrix& x) const;

  // Solves the shifted system and returns Z = A X + X B together with X, the
  // two quantities the ADMM Z-update needs. Cheaper than solve() + apply().
  Matrix solve_and_apply(const Matrix& c, double shift, Matrix* x_out = nullptr) const;

  Eigen::Index rows() const { return a_.vectors.rows(); }
  Eigen::Index cols() const { return b_.vectors.rows(); }
  const SymEig& left() const { return a_; }
  const SymEig& right() const { return b_; }

 private:
  // alpha_i + shift + beta_j, rejecting near-singular systems.
  Matrix pair_sums(double shift) const;
  // alpha_i + beta_j without the singularity check.
  Matrix pair_sums_raw() const;

  SymEig a_;
  SymEig b_;
};

// The covariance operator Sigma = Psi_r (x) I + I (x) Psi_c + diag(vec Gamma)
// + lambda*I acting on n x m matrices:
//   V -> Psi_c V + V Psi_r + Gamma o V + lambda V.
struct KronSumOperator {
  Matrix psi_c;  // n x n symmetric PSD
  Matrix psi_r;  // m x m symmetric PSD
  Matrix gamma;  // n x m nonnegative
  double lambda = 0.0;

  Eigen::Index rows() const { return psi_c.rows(); }
  Eigen::Index cols() const { return psi_r.rows(); }

  // Throws DimensionError/DomainError on inconsistent shapes or negative
  // gamma/lambda.
  void validate() const;

  // The explicit (nm) x (nm) matrix. Test and small-instance use only.
  Matrix dense() const;

  // Diagonal of dense(), reshaped to n x m.
  Matrix diagonal() const;
};

Matrix kron_apply(const KronSumOperator& op, const Matrix& v);

inline constexpr double kCgDefaultTol = 1e-10;

// Solves op(X) = rhs by conjugate gradients with a Jacobi preconditioner.
// max_iters <= 0 selects the default cap 4*n*m. Throws NonConvergenceError
// with the final relative residual when the cap is reached. `x0` warm-starts
// the iteration when non-null.
Matrix cg_solve(const KronSumOperator& op, const Matrix& rhs, double tol = kCgDefaultTol,
                int max_iters = 0, const Matrix* x0 = nullptr);

// Symmetric PSD square root, with eigenvalues clamped at zero.
Matrix psd_sqrt(const Matrix& s);

double min_eigenvalue(const Matrix& s);

}  // namespace rpca
