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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "latewin/bench/runner.hpp"

namespace latewin::bench {
namespace {

namespace fs = std::filesystem;

class ListCursor final : public EventCursor {
 public:
  explicit ListCursor(std::vector<Event> events) : events_(std::move(events)) {}
  const Event* next() override { return i_ < events_.size() ? &events_[i_++] : nullptr; }

 private:
  std::vector<Event> events_;
  std::size_t i_ = 0;
};

Bytes body(char tag, std::vector<std::int64_t> values) {
  Bytes b{static_cast<std::uint8_t>(tag)};
  for (auto v : values) {
    const auto at = b.size();
    b.resize(at + 8);
    std::memcpy(b.data() + at, &v, 8);
  }
  return b;
}

Event emitted(const std::string& key, std::uint16_t origin, TimeMs start, std::uint32_t seq, Bytes b) {
  const WindowInstance w{"", start, start + 100};
  return Event{key, start + 99, tag_emission(origin, w, seq, b)};
}

FiringContext ctx() { return {WindowInstance{"", 0, 1000}, 0, false}; }

TEST(DelayModel, ProbabilitiesSumToOneAndDecrease) {
  DelayModel m(5);
  double total = 0;
  for (int i = 0; i <= 5; ++i) total += m.probability(i);
  EXPECT_NEAR(total, 1.0, 1e-12);
  // floor(LogNormal(0,1)): P(0) = Phi(0) = 0.5.
  EXPECT_NEAR(m.probability(0), 0.5, 1e-12);
  // The last index also absorbs the clamped tail.
  for (int i = 0; i < 4; ++i) EXPECT_GT(m.probability(i), m.probability(i + 1));
}

TEST(DelayModel, EmpiricalMatchesAnalytical) {
  DelayModel m(4);
  std::mt19937_64 rng(9);
  std::vector<int> hits(5, 0);
  const int n = 200'000;
  for (int i = 0; i < n; ++i) ++hits.at(m.sample(rng));
  for (int i = 0; i <= 4; ++i) EXPECT_NEAR(hits[i] / static_cast<double>(n), m.probability(i), 0.005) << i;
}

TEST(Generator, TimestampFollowsWindowIndex) {
  auto spec = WorkloadSpec::defaults(WorkloadKind::Average);
  spec.past_windows = 3;
  EventGenerator g(spec, 5);
  const TimeMs now = 100'000;
  bool saw_index3 = false;
  for (int i = 0; i < 5'000; ++i) {
    const auto ge = g.next(now);
    EXPECT_EQ(ge.event.event_time, now - ge.window_index * spec.window_duration_ms);
    EXPECT_EQ(ge.event.payload.size(), spec.payload_bytes);
    saw_index3 |= ge.window_index == 3;
  }
  EXPECT_TRUE(saw_index3);
}

TEST(Generator, SeedDeterminism) {
  for (auto kind : {WorkloadKind::Average, WorkloadKind::Bigrams, WorkloadKind::StockMarket, WorkloadKind::Lrb}) {
    auto spec = WorkloadSpec::defaults(kind);
    EventGenerator a(spec, 11), b(spec, 11), c(spec, 12);
    bool differs = false;
    for (int i = 0; i < 500; ++i) {
      const auto x = a.next(50'000 + i), y = b.next(50'000 + i), z = c.next(50'000 + i);
      ASSERT_EQ(x.source, y.source);
      ASSERT_EQ(x.event.key, y.event.key);
      ASSERT_EQ(x.event.event_time, y.event.event_time);
      ASSERT_EQ(x.event.payload, y.event.payload);
      differs |= x.event.payload != z.event.payload;
    }
    EXPECT_TRUE(differs) << to_string(kind);
  }
}

TEST(Generator, SourcesMatchPipeline) {
  for (auto kind : {WorkloadKind::Average, WorkloadKind::Bigrams, WorkloadKind::StockMarket, WorkloadKind::Lrb}) {
    auto spec = WorkloadSpec::defaults(kind);
    const Pipeline p = workload_pipeline(spec);
    EventGenerator g(spec, 1);
    for (int i = 0; i < 300; ++i) EXPECT_TRUE(p.has_source(std::string(g.next(10'000).source)));
  }
}

TEST(Profiles, DeskDividesDurationsOnly) {
  for (auto kind : {WorkloadKind::Average, WorkloadKind::Bigrams, WorkloadKind::StockMarket, WorkloadKind::Lrb}) {
    const auto desk = WorkloadSpec::defaults(kind, Profile::Desk);
    const auto full = WorkloadSpec::defaults(kind, Profile::Full);
    EXPECT_EQ(desk.window_duration_ms * 10, full.window_duration_ms);
    EXPECT_EQ(desk.max_ingestion_rate, full.max_ingestion_rate);
    EXPECT_EQ(desk.payload_bytes, full.payload_bytes);
  }
  EXPECT_EQ(WorkloadSpec::defaults(WorkloadKind::Average).window_duration_ms, 2'000);
  EXPECT_EQ(WorkloadSpec::defaults(WorkloadKind::Lrb, Profile::Full).window_duration_ms, 60'000);
}

TEST(Udf, Average) {
  ListCursor c({{"k", 1, average_payload(1)}, {"k", 2, average_payload(2)}, {"k", 3, average_payload(3)}});
  EXPECT_EQ(average_udf(ctx(), c).value, "count=3 sum=6 mean=2.000");
  ListCursor empty({});
  EXPECT_EQ(average_udf(ctx(), empty).value, "count=0 sum=0 mean=0.000");
}

TEST(Udf, BigramsCountsAdjacentPairs) {
  ListCursor c({{"k", 1, bigrams_payload("a b a b")}, {"k", 2, bigrams_payload("c")}});
  const auto v = bigrams_udf(ctx(), c).value;
  EXPECT_NE(v.find("bigrams=3 distinct=2"), std::string::npos) << v;
  EXPECT_NE(v.find("[a b]=2 [b a]=1"), std::string::npos) << v;

  // Order of sentences does not matter.
  ListCursor x({{"k", 1, bigrams_payload("x y z")}, {"k", 2, bigrams_payload("y z q")}});
  ListCursor y({{"k", 2, bigrams_payload("y z q")}, {"k", 1, bigrams_payload("x y z")}});
  EXPECT_EQ(bigrams_udf(ctx(), x).value, bigrams_udf(ctx(), y).value);
}

TEST(Udf, RollingAndAlerts) {
  ListCursor c({{"S01", 1, tick_payload(100)}, {"S01", 2, tick_payload(106)}, {"S02", 3, tick_payload(100)},
                {"S02", 4, tick_payload(104)}});
  const auto r = rolling_udf(ctx(), c);
  EXPECT_EQ(r.value, "S01:100,106,103;S02:100,104,102;");
  ASSERT_EQ(r.emit.size(), 2u);

  std::vector<Event> in;
  for (const auto& e : r.emit) in.push_back(emitted(e.key, 0, 0, 0, e.payload));
  ListCursor a(in);
  const auto alerts = alert_count_udf(ctx(), a);
  // 6% move alerts, 4% does not.
  EXPECT_EQ(alerts.value, "S01=1;");
}

TEST(Udf, CorrelationOfPerfectlyLinearPairs) {
  std::vector<Event> in;
  for (int s = 0; s < 3; ++s) {
    const std::string sym = "S0" + std::to_string(s);
    in.push_back(emitted(sym, 0, 0, 0, body('A', {s + 1})));
    in.push_back(emitted(sym, 1, 0, 0, body('M', {2 * (s + 1)})));
  }
  ListCursor c(in);
  const auto v = correlate_udf(ctx(), c).value;
  EXPECT_NE(v.find("S00:1/2;S01:2/4;S02:3/6;"), std::string::npos) << v;
  EXPECT_NE(v.find("corr=1.000000"), std::string::npos) << v;
}

TEST(Udf, LatestFiringSupersedes) {
  // Refinement seq 1 of the same upstream window replaces seq 0.
  ListCursor c({emitted("S00", 0, 0, 0, body('A', {5})), emitted("S00", 1, 0, 0, body('M', {1})),
                emitted("", 0, 0, 1, {}), emitted("S00", 0, 0, 1, body('A', {7}))});
  EXPECT_NE(correlate_udf(ctx(), c).value.find("S00:7/1;"), std::string::npos);
}

TEST(Lrb, TollRule) {
  EXPECT_EQ(lrb_toll(60, 30, false), 200);
  EXPECT_EQ(lrb_toll(60, 30, true), 0);
  EXPECT_EQ(lrb_toll(50, 30, false), 0);
  EXPECT_EQ(lrb_toll(60, 40, false), 0);
  EXPECT_EQ(lrb_toll(51, 0, false), 2);
}

TEST(Lrb, AccidentNeedsTwoStoppedVehiclesAtOnePosition) {
  ListCursor one({{"v1", 1, lrb_payload(4, 10, 0)}, {"v1", 2, lrb_payload(4, 10, 0)}, {"v2", 3, lrb_payload(4, 11, 0)}});
  EXPECT_EQ(accident_udf(ctx(), one).value, "");
  ListCursor two({{"v1", 1, lrb_payload(4, 10, 0)}, {"v2", 2, lrb_payload(4, 10, 0)}, {"v3", 3, lrb_payload(5, 10, 30)}});
  const auto r = accident_udf(ctx(), two);
  EXPECT_EQ(r.value, "4;");
  EXPECT_EQ(r.emit.size(), 1u);
}

TEST(Lrb, TollsFromSegmentStatsAndAccidents) {
  const auto seg = [](int s) { return "g" + std::to_string(s); };
  std::vector<Event> in{
      emitted(seg(1), 0, 0, 0, body('S', {60, 30})),  // congested: 2*10^2
      emitted(seg(2), 0, 0, 0, body('S', {60, 30})),  // congested but accident
      emitted(seg(2), 1, 0, 0, body('X', {1})),
      emitted(seg(3), 0, 0, 0, body('S', {80, 55})),  // fast
  };
  ListCursor c(in);
  EXPECT_EQ(toll_udf(ctx(), c).value, "segments=3 accidents=1 tolled=1 total=200 g1=200;");
}

TEST(Lrb, SegmentStats) {
  ListCursor c({{"v1", 1, lrb_payload(7, 1, 20)}, {"v2", 2, lrb_payload(7, 2, 40)}, {"v3", 3, lrb_payload(8, 2, 50)}});
  EXPECT_EQ(segment_stats_udf(ctx(), c).value, "7:2,30;8:1,50;");
}

TEST(TriggerStudy, ReproducesOrdering) {
  TriggerStudyConfig cfg;
  cfg.out_dir = fs::temp_directory_path() / "latewin-bench-study";
  fs::remove_all(cfg.out_dir);
  const auto study = run_trigger_study(cfg);
  using K = TriggerKind;
  for (double b : cfg.bounds) {
    const auto a = study.executions("unif", K::Aion, b), t = study.executions("unif", K::DeltaT, b);
    ASSERT_TRUE(a && t);
    EXPECT_LE(std::abs(static_cast<long>(*a) - static_cast<long>(*t)), 1) << b;
    for (const char* d : {"lnorm", "norm", "bursts"}) {
      const auto ka = study.executions(d, K::Aion, b);
      ASSERT_TRUE(ka) << d << " " << b;
      for (auto base : {K::DeltaT, K::DeltaEv}) {
        const auto kb = study.executions(d, base, b);
        if (kb) EXPECT_LE(*ka, *kb) << d << " " << b;
      }
    }
  }
  EXPECT_FALSE(study.executions("lnorm", K::DeltaT, 0.01));
  EXPECT_FALSE(study.executions("lnorm", K::DeltaEv, 0.01));

  std::ifstream in(cfg.out_dir / "trigger_study.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "k,trigger,distribution,max_staleness");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4 * 3 * cfg.max_k);
  EXPECT_TRUE(fs::exists(cfg.out_dir / "executions_to_bound.csv"));
  fs::remove_all(cfg.out_dir);
}

TEST(Runner, SmokeRunWritesCsv) {
  BenchConfig cfg;
  cfg.workload = WorkloadSpec::defaults(WorkloadKind::Average);
  cfg.workload.max_ingestion_rate = 1'000;
  cfg.workload.run_watermarks = 4;
  cfg.workload.warmup_watermarks = 2;
  cfg.workload.past_windows = 2;
  cfg.engine.state_root = fs::temp_directory_path() / "latewin-bench-smoke";
  cfg.engine.serialization_workers = 1;
  cfg.out_dir = fs::temp_directory_path() / "latewin-bench-out";
  fs::remove_all(cfg.out_dir);
  std::size_t firings = 0;
  cfg.on_result = [&](const FiringRecord&) { ++firings; };
  const auto r = run_benchmark(cfg);
  EXPECT_EQ(r.series.size(), 4u);
  EXPECT_GT(firings, 4u);
  EXPECT_GT(r.median_state_bytes, 0);
  EXPECT_FALSE(r.oom);
  for (const char* f : {"metrics.csv", "histogram.csv", "schedule.csv", "firings.csv"})
    EXPECT_TRUE(fs::exists(cfg.out_dir / f)) << f;
  std::ifstream in(cfg.out_dir / "metrics.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("watermark,tracked_state_bytes,", 0), 0u);
  fs::remove_all(cfg.out_dir);
  fs::remove_all(cfg.engine.state_root);
}

}  // namespace
}  // namespace latewin::bench
