#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gamma_glm/parallel.hpp"
#include "gamma_glm/random.hpp"

using gamma_glm::Rng;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, {1, 2}), b(42, {1, 2}), c(42, {1, 3}), d(43, {1, 2});
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(Rng, UniformIsOpenAndBelowIsUnbiased) {
  Rng rng(7);
  std::vector<int> counts(7, 0);
  const int n = 700000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[rng.below(7)];
  }
  // Expected 100000 per bin, sd about 293.
  for (int c : counts)
    EXPECT_NEAR(c, 100000, 1500);
}

TEST(Rng, NormalMoments) {
  Rng rng(8);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.012);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
  EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(Rng, GammaMomentsAcrossShapes) {
  for (double k : {0.2, 0.5, 1.0, 2.5, 10.0}) {
    Rng rng(9, {static_cast<std::uint64_t>(k * 10)});
    const int n = 100000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(k);
      ASSERT_GT(g, 0.0);
      s1 += g;
      s2 += g * g;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean / k, 1.0, 0.02) << "k=" << k;
    EXPECT_NEAR(var / k, 1.0, 0.05) << "k=" << k;
  }
}

TEST(ParallelFor, FillsEverySlotAndRethrowsLowestFailure) {
  std::vector<int> out(50, 0);
  gamma_glm::parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i); });
  for (std::size_t i = 0; i < out.size(); ++i)
    EXPECT_EQ(out[i], static_cast<int>(i));

  try {
    gamma_glm::parallel_for(20, 4, [](std::size_t i) {
      if (i == 5 || i == 13)
        throw std::runtime_error("task " + std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "task 5");
  }
}
