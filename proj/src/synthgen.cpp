#include "rpca/synthgen.hpp"

#include "rpca/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <string>

namespace rpca {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell_id, std::uint64_t trial) {
  return mix64(base ^ (cell_id * kSeedCellMul) ^ (trial * kSeedTrialMul));
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    x += 0x9E3779B97F4A7C15ULL;
    s = mix64(x);
  }
}

std::uint64_t Rng::next() {
  const auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::string_view to_string(DataKind k) {
  switch (k) {
    case DataKind::TypeA:
      return "a";
    case DataKind::TypeB:
      return "b";
    case DataKind::Hard:
      return "hard";
  }
  return "?";
}

DataKind parse_data_kind(std::string_view s) {
  if (s == "a") return DataKind::TypeA;
  if (s == "b") return DataKind::TypeB;
  if (s == "hard") return DataKind::Hard;
  throw DomainError("unknown data kind '" + std::string(s) + "'");
}

std::pair<double, double> default_outlier_range(DataKind k) {
  return k == DataKind::Hard ? std::pair{-1.0, 1.0} : std::pair{-20.0, 20.0};
}

void SyntheticSpec::validate() const {
  if (n < 1 || m < 1) throw DomainError("n and m must be positive");
  if (kind != DataKind::Hard && (rank < 1 || rank > std::min(n, m))) {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, min(n, m)]");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
  if (!(outlier_lo < outlier_hi) || !std::isfinite(outlier_lo) || !std::isfinite(outlier_hi)) {
    throw DomainError("need finite outlier_lo < outlier_hi");
  }
}

namespace {

Matrix draw(Rng& rng, Eigen::Index rows, Eigen::Index cols, bool gaussian) {
  Matrix a(rows, cols);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = gaussian ? rng.normal() : rng.uniform();
  return a;
}

Matrix draw_outliers(Rng& rng, const SyntheticSpec& spec) {
  Matrix e = Matrix::Zero(spec.n, spec.m);
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    if (rng.uniform() < spec.rho) {
      double v = 0.0;
      while (v == 0.0) v = rng.uniform(spec.outlier_lo, spec.outlier_hi);
      e.data()[k] = v;
    }
  }
  return e;
}

SyntheticInstance finish(Matrix z, Matrix e, const SyntheticSpec& spec) {
  SyntheticInstance inst;
  inst.y = z + e;
  inst.z_gt = std::move(z);
  inst.e_gt = std::move(e);
  inst.support = SupportMask::zero_set(inst.e_gt);
  inst.spec = spec;
  return inst;
}

SyntheticInstance factor_model(const SyntheticSpec& spec, bool gaussian) {
  spec.validate();
  Rng rng(spec.seed);
  const Matrix a = draw(rng, spec.n, spec.rank, gaussian);
  const Matrix b = draw(rng, spec.m, spec.rank, gaussian);
  Matrix z = a * b.transpose();
  Matrix e = draw_outliers(rng, spec);
  return finish(std::move(z), std::move(e), spec);
}

}  // namespace

SyntheticInstance gen_type_a(const SyntheticSpec& spec) {
  if (spec.kind != DataKind::TypeA) throw DomainError("gen_type_a needs kind TypeA");
  return factor_model(spec, true);
}

SyntheticInstance gen_type_b(const SyntheticSpec& spec) {
  if (spec.kind != DataKind::TypeB) throw DomainError("gen_type_b needs kind TypeB");
  return factor_model(spec, false);
}

SyntheticInstance gen_hard(const SyntheticSpec& spec) {
  if (spec.kind != DataKind::Hard) throw DomainError("gen_hard needs kind Hard");
  spec.validate();
  for (std::uint64_t bump = 0;; ++bump) {
    Rng rng(spec.seed + bump);
    Vector a(spec.n), b(spec.m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
    if (a.norm() == 0.0 || b.norm() == 0.0) continue;
    a /= a.norm();
    b /= b.norm();
    const Vector a3 = a.array().cube().matrix();
    const Vector b3 = b.array().cube().matrix();
    Matrix z = a3 * b3.transpose();
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    if (!(var > 0.0)) continue;
    z *= 1.0 / std::sqrt(var);
    Matrix e = draw_outliers(rng, spec);
    return finish(std::move(z), std::move(e), spec);
  }
}

SyntheticInstance generate(const SyntheticSpec& spec) {
  switch (spec.kind) {
    case DataKind::TypeA:
      return gen_type_a(spec);
    case DataKind::TypeB:
      return gen_type_b(spec);
    case DataKind::Hard:
      return gen_hard(spec);
  }
  throw DomainError("unknown data kind");
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return r;
}

}  // namespace rpca
