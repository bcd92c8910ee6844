#include "rpca/support.hpp"

#include "rpca/errors.hpp"

#include <algorithm>
#include <string>

namespace rpca {

namespace {
bool col_major_less(const std::pair<Eigen::Index, Eigen::Index>& a,
                    const std::pair<Eigen::Index, Eigen::Index>& b) {
  return a.second != b.second ? a.second < b.second : a.first < b.first;
}
}  // namespace

void SupportMask::normalize() {
  if (rows < 0 || cols < 0) throw DimensionError("support mask has negative shape");
  for (const auto& [i, j] : observed) {
    if (i < 0 || j < 0 || i >= rows || j >= cols) {
      throw DimensionError("support index (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(observed.begin(), observed.end(), col_major_less);
  auto dup = std::adjacent_find(observed.begin(), observed.end());
  if (dup != observed.end()) {
    throw DomainError("duplicate support index (" + std::to_string(dup->first) + ", " +
                      std::to_string(dup->second) + ")");
  }
}

Matrix SupportMask::indicator() const {
  Matrix m = Matrix::Zero(rows, cols);
  for (const auto& [i, j] : observed) m(i, j) = 1.0;
  return m;
}

SupportMask SupportMask::zero_set(const Matrix& m) {
  SupportMask s{m.rows(), m.cols(), {}};
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, j) == 0.0) s.observed.emplace_back(i, j);
    }
  }
  return s;
}

SupportMask SupportMask::full(Eigen::Index rows, Eigen::Index cols) {
  return zero_set(Matrix::Zero(rows, cols));
}

}  // namespace rpca
