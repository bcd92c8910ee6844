#include "rpca/matrix.hpp"

#include "rpca/errors.hpp"

#include <string>

namespace rpca {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + " contains non-finite entries");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
  }
}

double relative_error(const Matrix& a, const Matrix& b) {
  const double nb = b.norm();
  const double diff = (a - b).norm();
  return nb > 0.0 ? diff / nb : diff;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace rpca
