#include "oracles.hpp"

#include "rpca/errors.hpp"
#include "rpca/synthgen.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>
#include <cstring>
#include <set>

using namespace rpca;

namespace {

bool bytes_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  // memcmp on a null pointer is undefined even for zero length.
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

SyntheticSpec spec_of(DataKind k, std::uint64_t seed, Eigen::Index n = 40, Eigen::Index r = 3,
                      double rho = 0.1) {
  SyntheticSpec s;
  s.kind = k;
  s.n = s.m = n;
  s.rank = r;
  s.rho = rho;
  std::tie(s.outlier_lo, s.outlier_hi) = default_outlier_range(k);
  s.seed = seed;
  return s;
}

double sigma_ratio(const Matrix& z) {
  const Vector s = Eigen::JacobiSVD<Matrix>(z).singularValues();
  return s(0) / s(1);
}

}  // namespace

// ---------------------------------------------------------------- seeding

TEST(Seeds, SplitMixFinalizerReferenceValue) {
  // First output of SplitMix64 seeded with 0.
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
}

TEST(Seeds, DeriveSeedFollowsItsDefinition) {
  const std::uint64_t b = 12345, c = 7, t = 3;
  EXPECT_EQ(derive_seed(b, c, t), mix64(b ^ (c * kSeedCellMul) ^ (t * kSeedTrialMul)));
  EXPECT_EQ(derive_seed(b, c, t), derive_seed(b, c, t));
}

TEST(Seeds, AdjacentTrialsNeverCollide) {
  Rng rng(501);
  for (int k = 0; k < 10000; ++k) {
    const std::uint64_t s = rng.next();
    EXPECT_NE(derive_seed(s, 0, 0), derive_seed(s, 0, 1));
  }
}

TEST(Seeds, GridOfCellsAndTrialsIsCollisionFree) {
  for (std::uint64_t base = 0; base < 10; ++base) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t c = 0; c < 10; ++c)
      for (std::uint64_t t = 0; t < 10; ++t) seen.insert(derive_seed(base, c, t));
    EXPECT_EQ(seen.size(), 100u);
  }
  std::set<std::uint64_t> all;
  for (std::uint64_t base = 0; base < 10; ++base)
    for (std::uint64_t c = 0; c < 10; ++c)
      for (std::uint64_t t = 0; t < 10; ++t) all.insert(derive_seed(base, c, t));
  EXPECT_EQ(all.size(), 1000u);
}

// -------------------------------------------------------------------- Rng

TEST(RngTest, UniformRangeAndMoments) {
  Rng rng(502);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12, 0.002);
}

TEST(RngTest, NormalMoments) {
  Rng rng(503);
  double sum = 0.0, sq = 0.0, quart = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
    quart += x * x * x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 0.02);
  EXPECT_NEAR(quart / n, 3.0, 0.1);
}

TEST(RngTest, StreamIsReproducible) {
  Rng a(504), b(504);
  for (int k = 0; k < 1000; ++k) {
    ASSERT_EQ(a.next(), b.next());
  }
  Rng c(504), d(504);
  for (int k = 0; k < 1001; ++k) {
    const double x = c.normal(), y = d.normal();
    ASSERT_EQ(std::memcmp(&x, &y, sizeof x), 0);
  }
}

// ------------------------------------------------------------- generators

TEST(Generators, DeterministicBytes) {
  for (DataKind k : {DataKind::TypeA, DataKind::TypeB, DataKind::Hard}) {
    const SyntheticInstance a = generate(spec_of(k, 99)), b = generate(spec_of(k, 99));
    EXPECT_TRUE(bytes_equal(a.y, b.y));
    EXPECT_TRUE(bytes_equal(a.z_gt, b.z_gt));
    EXPECT_TRUE(bytes_equal(a.e_gt, b.e_gt));
    EXPECT_EQ(a.support.observed, b.support.observed);
    const SyntheticInstance c = generate(spec_of(k, 100));
    EXPECT_FALSE(bytes_equal(a.y, c.y));
  }
}

TEST(Generators, ExactSplitAndSupport) {
  for (DataKind k : {DataKind::TypeA, DataKind::TypeB, DataKind::Hard}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SyntheticInstance inst = generate(spec_of(k, seed, 30, 2, 0.3));
      const Matrix sum = inst.z_gt + inst.e_gt;
      EXPECT_TRUE(bytes_equal(sum, inst.y));
      const Matrix ind = inst.support.indicator();
      for (Eigen::Index idx = 0; idx < inst.y.size(); ++idx) {
        const bool zero = inst.e_gt.data()[idx] == 0.0;
        EXPECT_EQ(ind.data()[idx] == 1.0, zero);
      }
      const auto [lo, hi] = default_outlier_range(k);
      for (Eigen::Index idx = 0; idx < inst.e_gt.size(); ++idx) {
        const double e = inst.e_gt.data()[idx];
        if (e != 0.0) {
          EXPECT_GE(e, lo);
          EXPECT_LT(e, hi);
        }
      }
    }
  }
}

TEST(Generators, OutlierCountWithinBinomialBand) {
  const double rho = 0.2;
  const double nm = 30.0 * 30.0;
  const double sd = std::sqrt(nm * rho * (1 - rho));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SyntheticInstance inst = generate(spec_of(DataKind::TypeA, seed, 30, 2, rho));
    const double count = static_cast<double>((inst.e_gt.array() != 0.0).count());
    EXPECT_LE(std::abs(count - rho * nm), 4 * sd) << seed;
  }
}

TEST(Generators, TypeARankIsExact) {
  const SyntheticInstance inst = generate(spec_of(DataKind::TypeA, 7, 100, 10));
  EXPECT_EQ(numerical_rank(inst.z_gt), 10);
}

TEST(Generators, TypeBIsNonnegativeWithDominantLeadingValue) {
  int dominant = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SyntheticInstance b = generate(spec_of(DataKind::TypeB, seed, 40, 5));
    const SyntheticInstance a = generate(spec_of(DataKind::TypeA, seed, 40, 5));
    EXPECT_GE(b.z_gt.minCoeff(), 0.0);
    if (sigma_ratio(b.z_gt) > sigma_ratio(a.z_gt)) ++dominant;
  }
  EXPECT_GE(dominant, 90);
  EXPECT_EQ(numerical_rank(generate(spec_of(DataKind::TypeB, 3, 40, 5)).z_gt), 5);
}

TEST(Generators, HardCaseIsUnitVarianceRankOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticInstance inst = generate(spec_of(DataKind::Hard, seed, 50));
    const double mean = inst.z_gt.mean();
    const double var = (inst.z_gt.array() - mean).square().mean();
    EXPECT_NEAR(var, 1.0, 1e-10);
    EXPECT_EQ(numerical_rank(inst.z_gt), 1);
    EXPECT_LE(inst.e_gt.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Generators, RhoExtremes) {
  EXPECT_EQ(generate(spec_of(DataKind::TypeA, 1, 10, 2, 0.0)).e_gt.norm(), 0.0);
  const SyntheticInstance full = generate(spec_of(DataKind::TypeA, 1, 10, 2, 1.0));
  EXPECT_EQ((full.e_gt.array() == 0.0).count(), 0);
  EXPECT_TRUE(full.support.observed.empty());
}

TEST(Generators, SpecValidation) {
  SyntheticSpec s = spec_of(DataKind::TypeA, 1, 10, 11);
  EXPECT_THROW(generate(s), Error);
  s = spec_of(DataKind::TypeA, 1, 10, 2, 1.5);
  EXPECT_THROW(generate(s), DomainError);
  s = spec_of(DataKind::TypeA, 1);
  s.outlier_lo = 3.0;
  s.outlier_hi = 3.0;
  EXPECT_THROW(generate(s), DomainError);
  EXPECT_THROW(gen_hard(spec_of(DataKind::TypeA, 1)), DomainError);
  EXPECT_THROW(parse_data_kind("c"), DomainError);
  EXPECT_EQ(parse_data_kind(to_string(DataKind::Hard)), DataKind::Hard);
}
