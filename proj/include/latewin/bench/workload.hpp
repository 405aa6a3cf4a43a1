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

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "latewin/core/event.hpp"
#include "latewin/engine/pipeline.hpp"

namespace latewin::bench {

enum class WorkloadKind { Average, Bigrams, StockMarket, Lrb };
enum class Profile { Desk, Full };

WorkloadKind workload_by_name(std::string_view name);
std::string_view to_string(WorkloadKind kind) noexcept;
Profile profile_by_name(std::string_view name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Average;
  double max_ingestion_rate = 10'000;  // events/s
  TimeMs window_duration_ms = 2'000;
  std::size_t payload_bytes = 2'304;
  int past_windows = 1;
  int run_watermarks = 30;
  int warmup_watermarks = 10;
  /// StockMarket rolling window.
  TimeMs slide_size_ms = 1'000;
  TimeMs slide_ms = 500;

  /// Full profile: full-size windows. Desk profile: same rates and
  /// payloads, window durations divided by 10.
  static WorkloadSpec defaults(WorkloadKind kind, Profile profile = Profile::Desk);
};

/// windowIndex = floor(LogNormal(mu, sigma)) clamped to [0, past_windows].
class DelayModel {
 public:
  explicit DelayModel(int past_windows, double mu = 0.0, double sigma = 1.0);

  int sample(std::mt19937_64& rng);
  /// P(windowIndex = i).
  double probability(int i) const;
  int past_windows() const noexcept { return past_windows_; }

 private:
  int past_windows_;
  double mu_, sigma_;
  std::lognormal_distribution<double> dist_;
};

struct GeneratedEvent {
  std::string_view source;
  Event event;
  int window_index = 0;
};

/// Deterministic synthetic stream: ts = now - windowIndex * windowDuration,
/// payloads padded with random bytes to the workload's payload size.
class EventGenerator {
 public:
  EventGenerator(const WorkloadSpec& spec, std::uint64_t seed);

  GeneratedEvent next(TimeMs now);

 private:
  void fill(Bytes& payload, std::size_t from);
  std::string sentence();

  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  DelayModel delay_;
  std::vector<std::string> vocabulary_;
  std::discrete_distribution<std::size_t> zipf_;
  std::vector<std::int64_t> base_price_;
};

// Payload layouts, shared by the generator and the functions.
inline constexpr std::size_t kStockSymbols = 50;
inline constexpr int kLrbSegments = 100;

Bytes average_payload(std::int64_t value);
Bytes bigrams_payload(std::string_view sentence);
Bytes tick_payload(std::int64_t price_cents);
Bytes lrb_payload(std::int32_t segment, std::int32_t position, std::int32_t speed);

std::int64_t read_i64(const Bytes& payload, std::size_t offset = 0);
std::int32_t read_i32(const Bytes& payload, std::size_t offset);
std::string_view read_sentence(const Bytes& payload);

// Window functions of the four dataflows.
UdfResult average_udf(const FiringContext& ctx, EventCursor& events);
UdfResult bigrams_udf(const FiringContext& ctx, EventCursor& events);
/// Per-symbol min/max/mean of tick prices, emitted downstream.
UdfResult rolling_udf(const FiringContext& ctx, EventCursor& events);
/// Raises an alert for every rolling result whose (max - min) / min is at
/// least 5% and counts them per symbol.
UdfResult alert_count_udf(const FiringContext& ctx, EventCursor& events);
UdfResult mention_count_udf(const FiringContext& ctx, EventCursor& events);
/// Joins alert and mention counts on symbol; reports the pairs and their
/// Pearson correlation.
UdfResult correlate_udf(const FiringContext& ctx, EventCursor& events);
UdfResult segment_stats_udf(const FiringContext& ctx, EventCursor& events);
/// An accident is two or more stopped vehicles at one (segment, position).
UdfResult accident_udf(const FiringContext& ctx, EventCursor& events);
/// Toll per segment: 0 with an accident; 2 * (count - 50)^2 when the
/// average speed is below 40 and more than 50 vehicles reported; else 0.
UdfResult toll_udf(const FiringContext& ctx, EventCursor& events);

std::int64_t lrb_toll(std::int64_t count, std::int64_t avg_speed, bool accident) noexcept;

/// The workload's dataflow; the first operator is the one the metrics
/// describe.
Pipeline workload_pipeline(const WorkloadSpec& spec);

/// Source names the generator uses.
std::vector<std::string> workload_sources(WorkloadKind kind);

}  // namespace latewin::bench
