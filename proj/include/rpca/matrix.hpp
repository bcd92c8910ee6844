#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace rpca {

// Dense real matrices are Eigen column-major storage, so Eigen's linear
// index coincides with the column-wise vec() used throughout the model.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

bool all_finite(const Matrix& m);

// Throws DomainError naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& m, std::string_view what);

// Throws DimensionError unless `a` and `b` have identical shape.
void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what);

void require_square(const Matrix& m, std::string_view what);

// ||a - b||_F / ||b||_F; returns ||a||_F when b is zero.
double relative_error(const Matrix& a, const Matrix& b);

inline Matrix symmetrized(const Matrix& s) { return 0.5 * (s + s.transpose()); }

// Column-wise vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace rpca
