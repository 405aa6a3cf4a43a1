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

#include <random>

#include "latewin/core/watermark.hpp"
#include "latewin/core/window.hpp"

namespace latewin {
namespace {

Event at(TimeMs t, std::string key = "") { return Event{std::move(key), t, {}}; }

// Every window [s, s+size) with s a multiple of slide that covers t, found by
// scanning all candidate starts around t.
std::vector<WindowInstance> brute_sliding(TimeMs t, TimeMs size, TimeMs slide) {
  std::vector<WindowInstance> out;
  for (TimeMs s = t - size - slide; s <= t + slide; ++s) {
    if (((s % slide) + slide) % slide != 0) continue;
    if (s <= t && t < s + size) out.push_back({"", s, s + size});
  }
  return out;
}

TEST(AssignWindows, TumblingFloorsToBoundary) {
  auto w = assign_windows(at(25'000), WindowSpec::tumbling(10'000));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].start, 20'000);
  EXPECT_EQ(w[0].end, 30'000);
}

TEST(AssignWindows, SlidingOverlaps) {
  auto w = assign_windows(at(12'000), WindowSpec::sliding(10'000, 5'000));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], (WindowInstance{"", 5'000, 15'000}));
  EXPECT_EQ(w[1], (WindowInstance{"", 10'000, 20'000}));
}

TEST(AssignWindows, SlidingMatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const TimeMs slide = 1 + static_cast<TimeMs>(rng() % 50);
    const TimeMs size = slide * (1 + static_cast<TimeMs>(rng() % 6)) + static_cast<TimeMs>(rng() % 3);
    const TimeMs t = static_cast<TimeMs>(rng() % 10'000);
    auto got = assign_windows(at(t), WindowSpec::sliding(size, slide));
    EXPECT_EQ(got, brute_sliding(t, size, slide)) << "t=" << t << " size=" << size << " slide=" << slide;
    if (size % slide == 0) EXPECT_EQ(got.size(), static_cast<std::size_t>(size / slide));
  }
}

TEST(AssignWindows, TumblingAssignsExactlyOne) {
  for (TimeMs t = 0; t < 5'000; t += 37) EXPECT_EQ(assign_windows(at(t), WindowSpec::tumbling(300)).size(), 1u);
}

TEST(AssignWindows, SessionSingleton) {
  auto w = assign_windows(at(7'000), WindowSpec::session(4'000));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].start, 7'000);
  EXPECT_EQ(w[0].end, 11'000);
}

TEST(AssignWindows, CountNeedsAssigner) {
  EXPECT_THROW(assign_windows(at(1), WindowSpec::count_of(3)), std::logic_error);
}

TEST(AssignWindows, KeyIsCarried) {
  auto w = assign_windows(at(5, "abc"), WindowSpec::tumbling(10));
  EXPECT_EQ(w[0].key, "abc");
}

TEST(WindowSpec, Validation) {
  EXPECT_THROW(WindowSpec::tumbling(0), std::invalid_argument);
  EXPECT_THROW(WindowSpec::sliding(10, 0), std::invalid_argument);
  EXPECT_THROW(WindowSpec::sliding(10, 11), std::invalid_argument);
  EXPECT_THROW(WindowSpec::session(0), std::invalid_argument);
  EXPECT_THROW(WindowSpec::count_of(0), std::invalid_argument);
  EXPECT_NO_THROW(WindowSpec::sliding(10, 10));
}

TEST(WindowId, UniqueAndSafe) {
  WindowInstance a{"k/1", 0, 10}, b{"k/1", 0, 20}, c{"", 0, 10};
  EXPECT_NE(a.id().str(), b.id().str());
  EXPECT_NE(a.id().str(), c.id().str());
  EXPECT_EQ(a.id().str().find('/'), std::string::npos);
  EXPECT_EQ(c.id().str(), "__0_10");
}

TEST(IsLate, Tumbling) {
  const auto spec = WindowSpec::tumbling(10'000);
  EXPECT_TRUE(is_late(at(5'000), {10'000}, spec));
  EXPECT_FALSE(is_late(at(5'000), {9'999}, spec));
}

TEST(IsLate, SlidingNeedsAllExpired) {
  const auto spec = WindowSpec::sliding(10'000, 5'000);
  EXPECT_FALSE(is_late(at(12'000), {15'000}, spec));
  EXPECT_TRUE(is_late(at(12'000), {20'000}, spec));
}

TEST(IsLate, MonotoneInWatermark) {
  std::mt19937_64 rng(3);
  const auto spec = WindowSpec::sliding(900, 300);
  for (int i = 0; i < 500; ++i) {
    const auto e = at(static_cast<TimeMs>(rng() % 10'000));
    bool seen = false;
    for (TimeMs wm = 0; wm < 12'000; wm += 50) {
      const bool late = is_late(e, {wm}, spec);
      if (seen) EXPECT_TRUE(late);
      seen = seen || late;
    }
    EXPECT_TRUE(seen);
  }
}

TEST(WindowAssigner, SessionsMergeOnOverlap) {
  WindowAssigner a(WindowSpec::session(4'000));
  auto r1 = a.assign(at(1'000, "u"));
  EXPECT_EQ(r1.windows[0], (WindowInstance{"u", 1'000, 5'000}));
  auto r2 = a.assign(at(10'000, "u"));
  EXPECT_TRUE(r2.merged.empty());
  auto r3 = a.assign(at(4'000, "u"));
  ASSERT_EQ(r3.windows.size(), 1u);
  EXPECT_EQ(r3.windows[0], (WindowInstance{"u", 1'000, 8'000}));
  ASSERT_EQ(r3.merged.size(), 1u);
  auto r4 = a.assign(at(7'000, "u"));
  EXPECT_EQ(r4.windows[0], (WindowInstance{"u", 1'000, 14'000}));
  EXPECT_EQ(r4.merged.size(), 2u);
  // separate key untouched
  auto r5 = a.assign(at(2'000, "v"));
  EXPECT_EQ(r5.windows[0], (WindowInstance{"v", 2'000, 6'000}));
}

TEST(WindowAssigner, CountWindowsPerKey) {
  WindowAssigner a(WindowSpec::count_of(2));
  auto x1 = a.assign(at(0, "x"));
  auto y1 = a.assign(at(0, "y"));
  auto x2 = a.assign(at(0, "x"));
  auto x3 = a.assign(at(0, "x"));
  EXPECT_FALSE(x1.count_window_full);
  EXPECT_TRUE(x2.count_window_full);
  EXPECT_EQ(x1.windows[0], x2.windows[0]);
  EXPECT_NE(x2.windows[0], x3.windows[0]);
  EXPECT_EQ(y1.windows[0].start, 0);
  EXPECT_EQ(x3.windows[0].start, 2);
}

TEST(PeriodicWatermark, NothingBeforeEvents) {
  PeriodicWatermarkSource src(1'000, 0);
  EXPECT_FALSE(src.poll(0));
  EXPECT_FALSE(src.poll(5'000));
}

TEST(PeriodicWatermark, MaxMinusAllowance) {
  PeriodicWatermarkSource a(1'000, 0), b(1'000, 2'000);
  for (auto* s : {&a, &b}) {
    s->observe(10'000);
    s->observe(30'000);
    s->observe(20'000);
  }
  std::optional<Watermark> wa, wb;
  for (TimeMs now = 0; now <= 3'000 && !wa; now += 100) wa = a.poll(now);
  for (TimeMs now = 0; now <= 3'000 && !wb; now += 100) wb = b.poll(now);
  ASSERT_TRUE(wa && wb);
  EXPECT_EQ(wa->timestamp, 30'000);
  EXPECT_EQ(wb->timestamp, 28'000);
  EXPECT_EQ(wa->kind, WatermarkKind::Periodic);
}

TEST(PeriodicWatermark, EmitsOncePerPeriodMonotone) {
  PeriodicWatermarkSource src(1'000, 0);
  std::mt19937_64 rng(1);
  int emitted = 0;
  TimeMs last = -1;
  for (TimeMs now = 0; now < 20'000; now += 10) {
    src.observe(static_cast<TimeMs>(rng() % 50'000));
    if (auto wm = src.poll(now)) {
      ++emitted;
      EXPECT_GE(wm->timestamp, last);
      last = wm->timestamp;
    }
  }
  EXPECT_GE(emitted, 19);
  EXPECT_LE(emitted, 20);
}

}  // namespace
}  // namespace latewin
