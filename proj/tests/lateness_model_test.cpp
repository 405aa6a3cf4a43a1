/*
 * Copyright 2026 The latewin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "latewin/error.hpp"
#include "latewin/lateness/histogram.hpp"

namespace latewin {
namespace {

// Cumulative-sum quantile over raw samples, reported as the upper edge of the
// bin holding the ceil(p * n)-th smallest sample.
TimeMs cumsum_oracle(std::vector<TimeMs> samples, double p, TimeMs width) {
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(samples.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return (samples[rank - 1] / width + 1) * width;
}

TEST(Histogram, ObserveBins) {
  LatenessHistogram h(1'000);
  h.observe(2'500);
  h.observe(0);
  EXPECT_EQ(h.counts().at(2), 1u);
  EXPECT_EQ(h.counts().at(0), 1u);
  EXPECT_EQ(h.n(), 2u);
  EXPECT_EQ(h.max_observed(), 2'500);
}

TEST(Histogram, ManyObservations) {
  LatenessHistogram h;
  for (int i = 0; i < 1'000'000; ++i) h.observe(i % 5'000);
  EXPECT_EQ(h.n(), 1'000'000u);
}

TEST(Histogram, QuantileExamples) {
  LatenessHistogram h(1'000);
  EXPECT_THROW(h.quantile(0.5), EmptyHistogram);
  for (int i = 0; i < 10; ++i) h.observe(100);
  EXPECT_EQ(h.quantile(0.99), 1'000);
  LatenessHistogram u(1'000);
  for (int b = 0; b < 10; ++b)
    for (int i = 0; i < 7; ++i) u.observe(b * 1'000 + 3);
  EXPECT_EQ(u.quantile(0.5), 5'000);
  EXPECT_EQ(u.quantile(1.0), 10'000);
  EXPECT_THROW(u.quantile(0.0), std::invalid_argument);
  EXPECT_THROW(u.quantile(1.5), std::invalid_argument);
}

TEST(Histogram, QuantileMatchesCumsumOracle) {
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> d(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    LatenessHistogram h(250);
    std::vector<TimeMs> samples;
    const int n = 1 + static_cast<int>(rng() % 3000);
    for (int i = 0; i < n; ++i) {
      samples.push_back(static_cast<TimeMs>(d(rng) * 2'000));
      h.observe(samples.back());
    }
    for (double p : {0.01, 0.1, 0.5, 0.9, 0.99, 0.9996, 1.0}) EXPECT_EQ(h.quantile(p), cumsum_oracle(samples, p, 250));
  }
}

TEST(Histogram, QuantileMonotoneInP) {
  std::mt19937_64 rng(9);
  LatenessHistogram h(100);
  for (int i = 0; i < 5000; ++i) h.observe(static_cast<TimeMs>(rng() % 100'000));
  TimeMs prev = 0;
  for (int i = 1; i <= 1000; ++i) {
    const auto q = h.quantile(i / 1000.0);
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Histogram, Csv) {
  LatenessHistogram h(1'000);
  h.observe(10);
  h.observe(2'100);
  std::ostringstream out;
  h.write_csv(out);
  EXPECT_EQ(out.str(), "bin_start_ms,count\n0,1\n2000,1\n");
}

TEST(CleanupBound, InitialBoundBelowNMin) {
  LatenessHistogram h;
  for (int i = 0; i < 999; ++i) h.observe(10);
  CleanupConfig cfg{0.99, 0.05, 1'000, 200'000};
  auto b = cleanup_bound(h, cfg);
  EXPECT_EQ(b.bound_ms, 200'000);
  EXPECT_FALSE(b.adaptive);
}

TEST(CleanupBound, DkwMarginAndQuantile) {
  EXPECT_NEAR(dkw_margin(20'000, 0.05), std::sqrt(std::log(40.0) / 40'000.0), 1e-15);
  EXPECT_NEAR(dkw_margin(20'000, 0.05), 0.0096, 1e-4);
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(0, 1);
  LatenessHistogram h;
  std::vector<TimeMs> samples;
  for (int i = 0; i < 20'000; ++i) {
    samples.push_back(static_cast<TimeMs>(d(rng) * 2'000));
    h.observe(samples.back());
  }
  auto b = cleanup_bound(h, CleanupConfig{0.99, 0.05, 1'000, 0});
  EXPECT_TRUE(b.adaptive);
  EXPECT_EQ(b.basis_n, 20'000u);
  EXPECT_EQ(b.bound_ms, cumsum_oracle(samples, 0.99 + dkw_margin(20'000, 0.05), 1'000));
  // Full coverage clamps to the largest delay seen.
  auto full = cleanup_bound(h, CleanupConfig{1.0, 0.05, 1'000, 0});
  EXPECT_EQ(full.bound_ms, h.max_observed());
}

TEST(CleanupBound, NonIncreasingInN) {
  // Same empirical distribution replicated: the margin shrinks with n.
  TimeMs prev = std::numeric_limits<TimeMs>::max();
  for (int reps = 1; reps <= 64; reps *= 2) {
    LatenessHistogram h(10);
    for (int r = 0; r < reps; ++r)
      for (int i = 0; i < 1000; ++i) h.observe(i * i / 100);
    const auto b = cleanup_bound(h, CleanupConfig{0.95, 0.05, 1'000, 0});
    EXPECT_LE(b.bound_ms, prev);
    prev = b.bound_ms;
  }
}

TEST(CleanupBound, CoverageOnHeldOutSamples) {
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1'000 + trial);
    std::lognormal_distribution<double> d(0, 1);
    LatenessHistogram h;
    for (int i = 0; i < 20'000; ++i) h.observe(static_cast<TimeMs>(d(rng) * 2'000));
    const auto b = cleanup_bound(h, CleanupConfig{0.99, 0.05, 1'000, 0});
    int covered = 0;
    for (int i = 0; i < 20'000; ++i) covered += static_cast<TimeMs>(d(rng) * 2'000) <= b.bound_ms;
    good += covered >= 0.98 * 20'000;
  }
  EXPECT_GE(good, 95);
}

TEST(ShouldPurge, Examples) {
  CleanupBound b{50'000};
  EXPECT_FALSE(should_purge(10'000, 59'999, b));
  EXPECT_TRUE(should_purge(10'000, 60'000, b));
}

}  // namespace
}  // namespace latewin
