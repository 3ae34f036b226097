#include "ltspin/rng.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ltspin/stats.hpp"

namespace {

using namespace ltspin;

// Reference outputs frozen from an independent implementation of the
// published SplitMix64 algorithm (state 0 vector matches the author's test
// vector).
TEST(SplitMix64, ReferenceVector) {
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafull);
  EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ull);
  EXPECT_EQ(splitmix64(s), 0x06c45d188009454full);
}

TEST(DeriveSeed, ReferenceValues) {
  EXPECT_EQ(derive_seed(1, 2, 3, 4), 0xd55ccd4aeb3ccafbull);
  EXPECT_EQ(derive_seed(42, 0), 0xc16129ecd0dc5b93ull);
}

TEST(DeriveSeed, DistinctAcrossIndices) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) {
      seen.insert(derive_seed(7, a, b));
      seen.insert(derive_seed(7, a, b, 1));
    }
  EXPECT_EQ(seen.size(), 20u * 20u * 2u);
  EXPECT_NE(derive_seed(1, 5), derive_seed(2, 5));
}

TEST(Xoshiro, ReferenceVector) {
  Xoshiro256pp rng(12345);
  EXPECT_EQ(rng(), 0x8d948a82def8a568ull);
  EXPECT_EQ(rng(), 0x3477f953796702a0ull);
  EXPECT_EQ(rng(), 0x15caa2fce6db8d69ull);
  EXPECT_EQ(rng(), 0x2cef8853c20c6dd0ull);
  EXPECT_EQ(rng(), 0x43ff3fff9c039cd9ull);

  Xoshiro256pp zero(0);
  EXPECT_EQ(zero(), 0x53175d61490b23dfull);
  EXPECT_EQ(zero(), 0x61da6f3dc380d507ull);
  EXPECT_EQ(zero(), 0x5c0fdf91ec9a7bfcull);
}

TEST(Xoshiro, SameSeedSameStream) {
  Xoshiro256pp a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Uniform01, FirstDrawReference) {
  Xoshiro256pp rng(12345);
  EXPECT_DOUBLE_EQ(uniform01(rng), 0.5530478066930038);
}

TEST(Uniform01, RangeAndMean) {
  Xoshiro256pp rng(7);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean 1/2, sd of the mean = 1/sqrt(12 n).
  EXPECT_NEAR(sum / n, 0.5, 4.0 / std::sqrt(12.0 * n));
}

TEST(UniformBelow, BoundsAndUniformity) {
  Xoshiro256pp rng(11);
  const std::uint64_t n = 7;
  std::vector<std::int64_t> counts(n, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t v = uniform_below(rng, n);
    ASSERT_LT(v, n);
    ++counts[v];
  }
  const std::vector<double> probs(n, 1.0 / static_cast<double>(n));
  const ChiSquareResult gof = chi_square_gof(counts, probs);
  EXPECT_GT(gof.p_value, 0.001);
}

TEST(UniformBelow, OneIsAlwaysZero) {
  Xoshiro256pp rng(3);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(uniform_below(rng, 1), 0u);
}

TEST(UniformSymmetric, Range) {
  Xoshiro256pp rng(5);
  const double hw = 1.75;
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < 100000; ++i) {
    const double x = uniform_symmetric(rng, hw);
    ASSERT_GE(x, -hw);
    ASSERT_LT(x, hw);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  // Both halves actually visited.
  EXPECT_LT(lo, -hw * 0.99);
  EXPECT_GT(hi, hw * 0.99);
}

}  // namespace
