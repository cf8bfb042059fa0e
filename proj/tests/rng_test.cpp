#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

#include "pair/rng.hpp"

using namespace pair;

TEST(Stream, SameKeySameSequence) {
  Stream a(42, "sample/OL", 7, 3);
  Stream b(42, "sample/OL", 7, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Stream, KeyComponentsChangeTheSequence) {
  const auto first = [](Stream s) { return s(); };
  std::set<std::uint64_t> seen{
      first(Stream(42, "x", 7, 3)), first(Stream(43, "x", 7, 3)), first(Stream(42, "y", 7, 3)),
      first(Stream(42, "x", 8, 3)), first(Stream(42, "x", 7, 4)),
  };
  EXPECT_EQ(seen.size(), 5U);
}

TEST(Stream, DrawsDoNotDependOnVisitOrder) {
  std::array<double, 50> forward{}, backward{};
  for (std::size_t i = 0; i < forward.size(); ++i) forward[i] = Stream(1, "t", i, 0).uniform();
  for (std::size_t i = backward.size(); i-- > 0;) backward[i] = Stream(1, "t", i, 0).uniform();
  EXPECT_EQ(forward, backward);
}

TEST(Stream, UniformInUnitInterval) {
  Stream s(9, "u", 0, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // mean of U(0,1): sd of the sample mean is sqrt(1/12 / n) ~ 6.5e-4.
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Stream, BelowIsUniform) {
  Stream s(5, "below", 0, 0);
  constexpr int kBins = 7;
  constexpr int kDraws = 70000;
  std::array<int, kBins> counts{};
  for (int i = 0; i < kDraws; ++i) {
    const auto v = s.below(kBins);
    ASSERT_LT(v, static_cast<std::uint64_t>(kBins));
    ++counts[v];
  }
  double chi2 = 0.0;
  const double expected = double(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; P(chi2 > 22.46) = 0.001.
  EXPECT_LT(chi2, 22.46);
}

TEST(Stream, BernoulliEdges) {
  Stream s(3, "b", 0, 0);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(s.bernoulli(1.0));
    EXPECT_FALSE(s.bernoulli(0.0));
  }
}
