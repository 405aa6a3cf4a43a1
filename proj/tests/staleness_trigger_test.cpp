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

#include <chrono>
#include <cmath>
#include <functional>

#include "latewin/error.hpp"
#include "latewin/trigger/staleness.hpp"

namespace latewin {
namespace {

const StalenessParams kUnit{1.0, 1.0, 0.1};

std::vector<ArrivalModel> builtins() {
  return {ArrivalModel::lognormal(), ArrivalModel::uniform(), ArrivalModel::normal(), ArrivalModel::bursts()};
}

StalenessParams with_bound(double b) {
  auto p = kUnit;
  p.bound = b;
  return p;
}

// Smallest number of executions on the grid that meets the bound, by trying
// every subset of interior grid points of growing size.
std::size_t exhaustive_min(const ArrivalModel& m, double bound, int grid) {
  auto ok = [&](const std::vector<int>& pts) {
    double prev = 0;
    for (int g : pts) {
      const double u = static_cast<double>(g) / grid;
      if (!within_bound((u - prev) * (m.cdf(u) - m.cdf(prev)), bound)) return false;
      prev = u;
    }
    return within_bound((1 - prev) * (1 - m.cdf(prev)), bound);
  };
  for (int interior = 0; interior < grid; ++interior) {
    std::vector<int> pts;
    std::function<bool(int)> rec = [&](int from) {
      if (static_cast<int>(pts.size()) == interior) return ok(pts);
      for (int g = from; g < grid; ++g) {
        pts.push_back(g);
        if (rec(g + 1)) return true;
        pts.pop_back();
      }
      return false;
    };
    if (rec(1)) return static_cast<std::size_t>(interior) + 1;
  }
  return static_cast<std::size_t>(grid);
}

TEST(Staleness, Formula) {
  EXPECT_DOUBLE_EQ(staleness(1.0, 1.0, kUnit), 1.0);
  EXPECT_DOUBLE_EQ(staleness(0.0, 1.0, kUnit), 0.0);
  EXPECT_DOUBLE_EQ(staleness(1.0, 0.0, kUnit), 0.0);
  EXPECT_DOUBLE_EQ(staleness(10'000, 100, {100'000, 1'000, 0.1}), 0.01);
}

TEST(ArrivalModel, CdfBoundsAndMonotone) {
  for (const auto& m : builtins()) {
    EXPECT_DOUBLE_EQ(m.cdf(0), 0.0) << m.name();
    EXPECT_DOUBLE_EQ(m.cdf(1), 1.0) << m.name();
    double prev = 0;
    for (int i = 1; i <= 1000; ++i) {
      const double f = m.cdf(i / 1000.0);
      EXPECT_GE(f, prev - 1e-15) << m.name();
      prev = f;
    }
    EXPECT_NEAR(m.cdf(m.quantile(0.3)), 0.3, 1e-9) << m.name();
  }
}

TEST(ArrivalModel, EmpiricalFromHistogram) {
  LatenessHistogram h(10);
  for (int i = 0; i < 100; ++i) h.observe(i);  // uniform over [0, 100)
  auto m = ArrivalModel::empirical(h, 100);
  EXPECT_NEAR(m.cdf(0.25), 0.25, 1e-12);
  EXPECT_NEAR(m.cdf(0.55), 0.55, 1e-12);
  // Mass beyond the support is cut off and the rest renormalised.
  auto half = ArrivalModel::empirical(h, 50);
  EXPECT_NEAR(half.cdf(0.5), 0.5, 1e-12);
}

TEST(GreedyPlace, UniformQuarterBoundGivesHalves) {
  auto s = greedy_place(ArrivalModel::uniform(), with_bound(0.25));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.times_ms[0], 0.5, 1e-12);
  EXPECT_NEAR(s.staleness[0], 0.25, 1e-12);
  EXPECT_NEAR(s.staleness[1], 0.25, 1e-12);
}

TEST(GreedyPlace, BoundOneIsSingleExecution) {
  for (const auto& m : builtins()) {
    auto s = greedy_place(m, with_bound(1.0));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s.times_ms[0], 1.0);
  }
}

TEST(GreedyPlace, RespectsBoundAndEndsAtT) {
  for (const auto& m : builtins()) {
    for (double b : {0.1, 0.05, 0.01}) {
      auto s = greedy_place(m, with_bound(b));
      EXPECT_DOUBLE_EQ(s.times_ms.back(), 1.0);
      for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s.times_ms[i - 1], s.times_ms[i]);
      for (double st : s.staleness) EXPECT_TRUE(within_bound(st, b)) << m.name() << " " << b;
    }
  }
}

TEST(GreedyPlace, MinimalAgainstExhaustiveSearch) {
  for (const auto& m : builtins()) {
    for (double b : {0.1, 0.05}) {
      const auto k = greedy_place(m, with_bound(b), 50).size();
      EXPECT_EQ(k, exhaustive_min(m, b, 50)) << m.name() << " " << b;
    }
  }
}

TEST(GreedyPlace, InfeasibleOnCoarseGrid) {
  EXPECT_THROW(greedy_place(ArrivalModel::uniform(), with_bound(0.001), 10), InfeasibleBound);
  EXPECT_THROW(greedy_place(ArrivalModel::uniform(), with_bound(0.1), 5), std::invalid_argument);
}

TEST(Balance, UniformTwoPointsToHalves) {
  auto s0 = make_schedule({0.3, 1.0}, ArrivalModel::uniform(), kUnit);
  BalanceStats st;
  auto s = balance(s0, ArrivalModel::uniform(), kUnit, 10'000, 1e-10, &st);
  EXPECT_NEAR(s.times_ms[0], 0.5, 1e-9);
  EXPECT_NEAR(s.staleness[0], 0.25, 1e-9);
  EXPECT_NEAR(s.staleness[1], 0.25, 1e-9);
  EXPECT_TRUE(st.converged);
  EXPECT_LT(st.stddev, 1e-9);
}

TEST(Balance, FixedPoint) {
  auto s0 = make_schedule({0.5, 1.0}, ArrivalModel::uniform(), kUnit);
  BalanceStats st;
  auto s = balance(s0, ArrivalModel::uniform(), kUnit, 10'000, 1e-6, &st);
  EXPECT_EQ(st.iterations, 0u);
  EXPECT_EQ(s.times_ms, s0.times_ms);
}

TEST(Balance, LogNormalImprovesGreedy) {
  const auto m = ArrivalModel::lognormal();
  // Bound that makes the greedy scan use 5 executions.
  double bound = 0;
  for (double b = 0.05; b > 0.001; b *= 0.97) {
    if (greedy_place(m, with_bound(b)).size() == 5) {
      bound = b;
      break;
    }
  }
  ASSERT_GT(bound, 0);
  auto g = greedy_place(m, with_bound(bound));
  auto s = balance(g, m, with_bound(bound));
  EXPECT_EQ(s.size(), 5u);
  EXPECT_LT(max_staleness(s, m, kUnit), max_staleness(g, m, kUnit));
}

TEST(Balance, NeverWorseAndKeepsShape) {
  for (const auto& m : builtins()) {
    for (double b : {0.1, 0.05, 0.01}) {
      auto g = greedy_place(m, with_bound(b));
      auto s = balance(g, m, kUnit);
      ASSERT_EQ(s.size(), g.size());
      EXPECT_LE(max_staleness(s, m, kUnit), max_staleness(g, m, kUnit) + 1e-15);
      for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s.times_ms[i - 1], s.times_ms[i]);
      EXPECT_DOUBLE_EQ(s.times_ms.back(), 1.0);
    }
  }
}

TEST(Balance, ConvergesFastOnBuiltins) {
  for (const auto& m : builtins()) {
    for (std::size_t k = 1; k <= 20; ++k) {
      BalanceStats st;
      const auto t0 = std::chrono::steady_clock::now();
      balanced_schedule(k, m, kUnit, &st);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      EXPECT_TRUE(st.converged) << m.name() << " k=" << k;
      EXPECT_LT(st.stddev, 1e-6);
      EXPECT_LE(st.iterations, 10'000u);
      EXPECT_LT(secs, 1.0);
    }
  }
}

TEST(Balance, MaxStalenessNonIncreasingInK) {
  for (const auto& m : builtins()) {
    double prev = 2;
    for (std::size_t k = 1; k <= 20; ++k) {
      const double v = max_staleness(balanced_schedule(k, m, kUnit), m, kUnit);
      EXPECT_LE(v, prev + 1e-12) << m.name() << " k=" << k;
      prev = v;
    }
  }
}

TEST(Baselines, DeltaT) {
  auto s = baseline_deltat(4, ArrivalModel::uniform(), {100'000, 1, 0.1});
  EXPECT_EQ(s.times_ms, (std::vector<double>{25'000, 50'000, 75'000, 100'000}));
}

TEST(Baselines, DeltaEvUniformEqualsDeltaT) {
  auto a = baseline_deltaev(4, ArrivalModel::uniform(), {100'000, 1, 0.1});
  auto b = baseline_deltat(4, ArrivalModel::uniform(), {100'000, 1, 0.1});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.times_ms[i], b.times_ms[i], 1e-6);
}

TEST(Baselines, DeltaEvLogNormalMedian) {
  // Truncated median solved directly: Phi(ln(20u)) = Phi(ln 20) / 2.
  const double target = 0.5 * 0.5 * std::erfc(-std::log(20.0) / std::sqrt(2.0));
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double z = 0.5 * (lo + hi);
    (0.5 * std::erfc(-z / std::sqrt(2.0)) < target ? lo : hi) = z;
  }
  const double median = std::exp(lo) / 20.0;
  auto s = baseline_deltaev(2, ArrivalModel::lognormal(), kUnit);
  EXPECT_NEAR(s.times_ms[0], median, 1e-9);
}

TEST(MaxStaleness, Examples) {
  for (const auto& m : builtins()) EXPECT_DOUBLE_EQ(max_staleness(make_schedule({1.0}, m, kUnit), m, kUnit), 1.0);
  auto u = ArrivalModel::uniform();
  EXPECT_NEAR(max_staleness(baseline_deltat(2, u, kUnit), u, kUnit), 0.25, 1e-15);
  for (std::size_t k = 1; k <= 20; ++k) {
    EXPECT_NEAR(max_staleness(balanced_schedule(k, u, kUnit), u, kUnit), 1.0 / (k * k), 1e-9);
  }
}

TEST(PlanExecutions, BoundOneAnyModel) {
  for (const auto& m : builtins()) EXPECT_EQ(plan_executions(m, with_bound(1.0)).size(), 1u);
}

TEST(PlanExecutions, UniformMatchesDeltaT) {
  auto u = ArrivalModel::uniform();
  for (double b : {0.1, 0.05, 0.01}) {
    const auto aion = *executions_to_bound(TriggerKind::Aion, u, with_bound(b));
    const auto dt = executions_to_bound(TriggerKind::DeltaT, u, with_bound(b));
    ASSERT_TRUE(dt);
    EXPECT_LE(std::abs(static_cast<long>(aion) - static_cast<long>(*dt)), 1) << b;
    EXPECT_NEAR(max_staleness(plan_executions(u, with_bound(b)), u, kUnit),
                max_staleness(baseline_deltat(aion, u, kUnit), u, kUnit), 1e-3);
  }
}

TEST(PlanExecutions, FewerThanBaselinesOnSkewedModels) {
  for (const auto& m : {ArrivalModel::lognormal(), ArrivalModel::normal(), ArrivalModel::bursts()}) {
    for (double b : {0.1, 0.05, 0.01}) {
      const auto aion = *executions_to_bound(TriggerKind::Aion, m, with_bound(b));
      for (auto base : {TriggerKind::DeltaT, TriggerKind::DeltaEv}) {
        const auto k = executions_to_bound(base, m, with_bound(b));
        if (k) EXPECT_LE(aion, *k) << m.name() << " " << b << " " << to_string(base);
      }
    }
  }
}

TEST(PlanExecutions, LogNormalBaselinesFailTightBound) {
  const auto m = ArrivalModel::lognormal();
  EXPECT_FALSE(executions_to_bound(TriggerKind::DeltaT, m, with_bound(0.01)));
  EXPECT_FALSE(executions_to_bound(TriggerKind::DeltaEv, m, with_bound(0.01)));
  EXPECT_TRUE(within_bound(max_staleness(plan_executions(m, with_bound(0.01)), m, kUnit), 0.01));
}

TEST(PlanExecutions, ScalesWithT) {
  const auto m = ArrivalModel::lognormal();
  auto a = plan_executions(m, {1.0, 1.0, 0.05});
  auto b = plan_executions(m, {60'000.0, 500.0, 0.05});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.times_ms[i] * 60'000.0, b.times_ms[i], 1e-6);
}

TEST(Trigger, Names) {
  EXPECT_EQ(trigger_by_name("deltaev"), TriggerKind::DeltaEv);
  EXPECT_EQ(to_string(TriggerKind::Aion), "aion");
  EXPECT_THROW(trigger_by_name("x"), std::invalid_argument);
  EXPECT_THROW(ArrivalModel::by_name("x"), std::invalid_argument);
}

}  // namespace
}  // namespace latewin
