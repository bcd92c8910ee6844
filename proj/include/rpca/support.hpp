#pragma once

#include "rpca/matrix.hpp"

#include <utility>
#include <vector>

namespace rpca {

// Omega: the observed (uncorrupted) entries of an n x m matrix.
struct SupportMask {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> observed;  // sorted by (j, i), unique

  // Sorts, then throws DimensionError on out-of-range and DomainError on
  // duplicate pairs.
  void normalize();

  // 1 on Omega, 0 elsewhere.
  Matrix indicator() const;

  // Omega = entries where `m` is exactly zero.
  static SupportMask zero_set(const Matrix& m);
  static SupportMask full(Eigen::Index rows, Eigen::Index cols);
};

}  // namespace rpca
