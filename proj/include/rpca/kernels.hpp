#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// straightforward reference kept for testing, `parallel` is the OpenMP
// version the solvers call. Parallel reductions use a fixed chunking that
// does not depend on the thread count, so results are reproducible across
// OMP_NUM_THREADS settings.

#include "rpca/linalg.hpp"

namespace rpca::kernels {

// Per-slice quantities of the log-determinant bound. Slice j is
//   S_j = Psi + diag(gamma(:, j))/2 + (lambda/2) I,
// and the kernel returns
//   g       = sum_j (Psi - Psi S_j^{-1} Psi)
//   u(:, j) = gamma(:, j) - 1/2 gamma(:, j)^2 o diag(S_j^{-1}).
// Row slices are obtained by passing Psi_r and gamma^T.
struct SliceGradients {
  Matrix g;
  Matrix u;
};

namespace serial {

Matrix kron_apply(const KronSumOperator& op, const Matrix& v);
Matrix soft_threshold(const Matrix& m, double tau);
Matrix e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu,
                const Matrix& gamma);
SliceGradients slice_gradients(const Matrix& psi, const Matrix& gamma, double lambda);
double slice_logdet_sum(const Matrix& psi, const Matrix& gamma, double lambda);

}  // namespace serial

namespace parallel {

Matrix kron_apply(const KronSumOperator& op, const Matrix& v);
Matrix soft_threshold(const Matrix& m, double tau);
Matrix e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu,
                const Matrix& gamma);
SliceGradients slice_gradients(const Matrix& psi, const Matrix& gamma, double lambda);
double slice_logdet_sum(const Matrix& psi, const Matrix& gamma, double lambda);

}  // namespace parallel

// Number of threads the parallel kernels may use (1 without OpenMP).
int max_threads();

}  // namespace rpca::kernels
