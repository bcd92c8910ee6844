#include "rpca/kernels.hpp"

#include "rpca/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rpca::kernels {

namespace {

// Reductions over slices are split into this many contiguous chunks
// whatever the thread count, then summed in chunk order.
constexpr int kChunks = 16;

struct ChunkRange {
  Eigen::Index begin;
  Eigen::Index end;
};

ChunkRange chunk(Eigen::Index total, int c) {
  const Eigen::Index base = total / kChunks, extra = total % kChunks;
  const Eigen::Index begin = c * base + std::min<Eigen::Index>(c, extra);
  return {begin, begin + base + (c < extra ? 1 : 0)};
}

Matrix slice_matrix(const Matrix& psi, const Matrix& gamma, Eigen::Index j, double lambda) {
  Matrix s = psi;
  s.diagonal().array() += 0.5 * gamma.col(j).array() + 0.5 * lambda;
  return s;
}

[[noreturn]] void throw_slice_failure(Eigen::Index j, const Matrix& s) {
  // Locate the pivot with a plain factorization so the error is specific.
  int pivot = static_cast<int>(s.rows()) - 1;
  Matrix l = Matrix::Zero(s.rows(), s.cols());
  for (Eigen::Index k = 0; k < s.rows(); ++k) {
    const double d = s(k, k) - l.row(k).head(k).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      pivot = static_cast<int>(k);
      break;
    }
    l(k, k) = std::sqrt(d);
    for (Eigen::Index i = k + 1; i < s.rows(); ++i) {
      l(i, k) = (s(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / l(k, k);
    }
  }
  throw CholeskyError("slice " + std::to_string(j) + " is not positive definite (pivot " +
                          std::to_string(pivot) + ")",
                      pivot, static_cast<int>(j));
}

Eigen::LLT<Matrix> factor_slice(const Matrix& s, Eigen::Index j) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0.0) ||
      !llt.matrixLLT().diagonal().allFinite()) {
    throw_slice_failure(j, s);
  }
  return llt;
}

// First failing slice wins so the reported error does not depend on which
// thread happened to hit its failure first.
class FailureSlot {
 public:
  void record(Eigen::Index slice, std::exception_ptr e) {
#ifdef _OPENMP
#pragma omp critical(rpca_failure_slot)
#endif
    {
      if (!err_ || slice < slice_) {
        slice_ = slice;
        err_ = e;
      }
    }
  }
  void rethrow() const {
    if (err_) std::rethrow_exception(err_);
  }

 private:
  Eigen::Index slice_ = std::numeric_limits<Eigen::Index>::max();
  std::exception_ptr err_;
};

void check_slice_inputs(const Matrix& psi, const Matrix& gamma, double lambda) {
  require_square(psi, "slice psi");
  if (gamma.rows() != psi.rows()) throw DimensionError("slice gamma has wrong row count");
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ------------------------------------------------------------------ serial

namespace serial {

Matrix kron_apply(const KronSumOperator& op, const Matrix& v) {
  return op.psi_c * v + v * op.psi_r + op.gamma.cwiseProduct(v) + op.lambda * v;
}

Matrix soft_threshold(const Matrix& m, double tau) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double x = m.data()[k];
    const double a = std::abs(x) - tau;
    out.data()[k] = a > 0.0 ? std::copysign(a, x) : 0.0;
  }
  return out;
}

Matrix e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu, const Matrix& gamma) {
  Matrix e(y.rows(), y.cols());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double g = gamma.data()[k];
    const double num = y.data()[k] - z.data()[k] + q.data()[k] / mu;
    e.data()[k] = g > 0.0 ? num / (2.0 / (mu * g) + 1.0) : 0.0;
  }
  return e;
}

SliceGradients slice_gradients(const Matrix& psi, const Matrix& gamma, double lambda) {
  check_slice_inputs(psi, gamma, lambda);
  const Eigen::Index n = psi.rows();
  SliceGradients out{Matrix::Zero(n, n), Matrix::Zero(n, gamma.cols())};
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    const Matrix s = slice_matrix(psi, gamma, j, lambda);
    const Eigen::LLT<Matrix> llt = factor_slice(s, j);
    const Matrix sinv = llt.solve(Matrix::Identity(n, n));
    out.g += psi - psi * sinv * psi;
    const auto gj = gamma.col(j).array();
    out.u.col(j) = (gj - 0.5 * gj.square() * sinv.diagonal().array()).matrix();
  }
  out.g = symmetrized(out.g);
  return out;
}

double slice_logdet_sum(const Matrix& psi, const Matrix& gamma, double lambda) {
  check_slice_inputs(psi, gamma, lambda);
  double total = 0.0;
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    const Eigen::LLT<Matrix> llt = factor_slice(slice_matrix(psi, gamma, j, lambda), j);
    total += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return total;
}

}  // namespace serial

// ---------------------------------------------------------------- parallel

namespace parallel {

Matrix kron_apply(const KronSumOperator& op, const Matrix& v) {
  const Eigen::Index m = v.cols();
  Matrix out(v.rows(), m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < kChunks; ++c) {
    const ChunkRange r = chunk(m, c);
    const Eigen::Index w = r.end - r.begin;
    if (w == 0) continue;
    auto blk = out.middleCols(r.begin, w);
    blk.noalias() = op.psi_c * v.middleCols(r.begin, w);
    blk.noalias() += v * op.psi_r.middleCols(r.begin, w);
    blk += (op.gamma.middleCols(r.begin, w).array() + op.lambda).matrix().cwiseProduct(
        v.middleCols(r.begin, w));
  }
  return out;
}

Matrix soft_threshold(const Matrix& m, double tau) {
  Matrix out(m.rows(), m.cols());
  const Eigen::Index total = m.size();
  const double* in = m.data();
  double* o = out.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (total > 16384)
#endif
  for (Eigen::Index k = 0; k < total; ++k) {
    const double a = std::abs(in[k]) - tau;
    o[k] = a > 0.0 ? std::copysign(a, in[k]) : 0.0;
  }
  return out;
}

Matrix e_update(const Matrix& y, const Matrix& z, const Matrix& q, double mu, const Matrix& gamma) {
  Matrix e(y.rows(), y.cols());
  const Eigen::Index total = y.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (total > 16384)
#endif
  for (Eigen::Index k = 0; k < total; ++k) {
    const double g = gamma.data()[k];
    const double num = y.data()[k] - z.data()[k] + q.data()[k] / mu;
    e.data()[k] = g > 0.0 ? num / (2.0 / (mu * g) + 1.0) : 0.0;
  }
  return e;
}

SliceGradients slice_gradients(const Matrix& psi, const Matrix& gamma, double lambda) {
  check_slice_inputs(psi, gamma, lambda);
  const Eigen::Index n = psi.rows(), slices = gamma.cols();
  SliceGradients out{Matrix::Zero(n, n), Matrix::Zero(n, slices)};
  std::vector<Matrix> partial(kChunks);
  FailureSlot failure;

  // With D = diag(gamma_j)/2 + lambda/2 and S = Psi + D,
  //   Psi - Psi S^{-1} Psi = D - D S^{-1} D = D - (L^{-1} D)^T (L^{-1} D),
  // and diag(S^{-1}) is the column-wise squared norm of L^{-1}.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int c = 0; c < kChunks; ++c) {
    const ChunkRange r = chunk(slices, c);
    Matrix acc = Matrix::Zero(n, n);
    for (Eigen::Index j = r.begin; j < r.end; ++j) {
      try {
        const Vector d = (0.5 * gamma.col(j).array() + 0.5 * lambda).matrix();
        Matrix s = psi;
        s.diagonal() += d;
        const Eigen::LLT<Matrix> llt = factor_slice(s, j);
        Matrix linv = Matrix::Identity(n, n);
        llt.matrixL().solveInPlace(linv);
        const Matrix ld = linv * d.asDiagonal();
        acc.selfadjointView<Eigen::Lower>().rankUpdate(ld.transpose(), -1.0);
        acc.diagonal() += d;
        const auto gj = gamma.col(j).array();
        out.u.col(j) = (gj - 0.5 * gj.square() * linv.colwise().squaredNorm().transpose().array())
                           .matrix();
      } catch (...) {
        failure.record(j, std::current_exception());
        break;
      }
    }
    partial[c] = std::move(acc);
  }
  failure.rethrow();

  for (int c = 0; c < kChunks; ++c) out.g += partial[c];
  out.g = out.g.selfadjointView<Eigen::Lower>();
  return out;
}

double slice_logdet_sum(const Matrix& psi, const Matrix& gamma, double lambda) {
  check_slice_inputs(psi, gamma, lambda);
  std::vector<double> partial(kChunks, 0.0);
  FailureSlot failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int c = 0; c < kChunks; ++c) {
    const ChunkRange r = chunk(gamma.cols(), c);
    double acc = 0.0;
    for (Eigen::Index j = r.begin; j < r.end; ++j) {
      try {
        const Eigen::LLT<Matrix> llt = factor_slice(slice_matrix(psi, gamma, j, lambda), j);
        acc += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      } catch (...) {
        failure.record(j, std::current_exception());
        break;
      }
    }
    partial[c] = acc;
  }
  failure.rethrow();
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace parallel

}  // namespace rpca::kernels
