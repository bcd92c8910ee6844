#pragma once

// Seeded benchmark instances Y = Z_GT + E_GT.
//
// Randomness comes from xoshiro256** seeded by four SplitMix64 draws from
// the 64-bit seed. Uniform doubles take the top 53 bits; normals use the
// Box-Muller transform (both outputs of each pair are used). Draw order is
// fixed: factor A column-major, factor B column-major, then one support
// draw per entry of E (column-major) followed, for outlier entries, by one
// magnitude draw. The whole stream is therefore reproducible bit for bit.

#include "rpca/support.hpp"

#include <cstdint>
#include <string_view>

namespace rpca {

// derive_seed mixing constants (odd).
inline constexpr std::uint64_t kSeedCellMul = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kSeedTrialMul = 0xD1B54A32D192ED03ULL;

// SplitMix64 finalizer (bijective).
std::uint64_t mix64(std::uint64_t x);

// mix64(base ^ cell_id*kSeedCellMul ^ trial*kSeedTrialMul), wrapping.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell_id, std::uint64_t trial);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class DataKind { TypeA, TypeB, Hard };

std::string_view to_string(DataKind k);
DataKind parse_data_kind(std::string_view s);  // "a", "b", "hard"

struct SyntheticSpec {
  DataKind kind = DataKind::TypeA;
  Eigen::Index n = 100;
  Eigen::Index m = 100;
  Eigen::Index rank = 5;  // ignored for Hard (rank one)
  double rho = 0.1;
  double outlier_lo = -20.0;
  double outlier_hi = 20.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// (-20, 20) for TypeA/TypeB, (-1, 1) for Hard.
std::pair<double, double> default_outlier_range(DataKind k);

struct SyntheticInstance {
  Matrix y;
  Matrix z_gt;
  Matrix e_gt;
  SupportMask support;  // zero set of e_gt
  SyntheticSpec spec;
};

SyntheticInstance gen_type_a(const SyntheticSpec& spec);
SyntheticInstance gen_type_b(const SyntheticSpec& spec);
SyntheticInstance gen_hard(const SyntheticSpec& spec);
SyntheticInstance generate(const SyntheticSpec& spec);

// Number of singular values above rel_tol * sigma_max.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol = 1e-8);

}  // namespace rpca
