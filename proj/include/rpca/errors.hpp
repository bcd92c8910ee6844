#pragma once

#include <stdexcept>
#include <string>

namespace rpca {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch, non-square input where a square one is required, and
// similar structural misuse.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input outside an operation's mathematical domain (e.g. an all-zero
// ground truth passed to nrmse).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Cholesky breakdown. `pivot` is the zero-based index of the failing
// diagonal entry; `slice` names the column/row whose matrix failed when the
// factorization was one of a batch (-1 otherwise).
class CholeskyError : public NumericalError {
 public:
  CholeskyError(const std::string& what, int pivot, int slice = -1)
      : NumericalError(what), pivot_(pivot), slice_(slice) {}
  int pivot() const noexcept { return pivot_; }
  int slice() const noexcept { return slice_; }

 private:
  int pivot_;
  int slice_;
};

// Sylvester system whose smallest eigenvalue-pair sum is below the
// nonsingularity threshold.
class SingularSystemError : public NumericalError {
 public:
  SingularSystemError(const std::string& what, double min_sum)
      : NumericalError(what), min_sum_(min_sum) {}
  double min_sum() const noexcept { return min_sum_; }

 private:
  double min_sum_;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, int iterations, double residual)
      : NumericalError(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rpca
