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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latewin/bench/workload.hpp"
#include "latewin/engine/engine.hpp"

namespace latewin::bench {

struct BenchConfig {
  WorkloadSpec workload;
  EngineConfig engine;
  std::uint64_t seed = 42;
  /// Processing-time ms per wall ms for pacing; 0 runs as fast as possible.
  double time_scale = 0;
  /// CSV output directory; nothing is written when empty.
  std::filesystem::path out_dir;
  int samples_per_watermark = 10;
  /// Stop at the first watermark where tracked state exceeds the budget.
  bool stop_on_oom = false;
  /// Sees every firing, warm-up included.
  std::function<void(const FiringRecord&)> on_result;
};

struct WatermarkMetrics {
  int watermark = 0;
  std::int64_t tracked_state_bytes = 0;  // median of the period's samples
  std::int64_t tracked_state_peak_bytes = 0;
  double ingestion_rate_normal = 0;
  double ingestion_rate_all = 0;
  double processing_rate_normal = 0;
  double processing_rate_all = 0;
  double max_staleness_observed = 0;
  double executions_per_window = 0;
  std::uint64_t dropped_beyond_bound = 0;
  std::int64_t destage_backlog_bytes = 0;
  std::size_t live_windows = 0;
  bool oom = false;
};

struct MetricsReport {
  std::vector<WatermarkMetrics> series;  // measured watermarks only
  /// Median over every raw sample of the measured watermarks.
  double median_state_bytes = 0;
  std::int64_t peak_state_bytes = 0;
  bool oom = false;
  double ingestion_rate_normal = 0;
  double ingestion_rate_all = 0;
  /// Median of events / wall time over the measured re-executions of the
  /// first operator.
  double reexec_processing_rate = 0;
  std::size_t reexecutions = 0;
  EngineCounters counters;
  double wall_seconds = 0;
};

/// Engine settings the benchmarks use unless told otherwise: smaller blocks
/// than the library default so staging granularity matches desk windows, and
/// the 256 MB budget the memory backend is measured against.
EngineConfig bench_engine_defaults();

/// Warm-up then measured watermarks of one workload against one backend.
/// Watermarks are emitted every window duration of processing time.
MetricsReport run_benchmark(const BenchConfig& config);

struct TriggerStudyConfig {
  std::vector<std::string> distributions{"lnorm", "unif", "norm", "bursts"};
  std::vector<TriggerKind> triggers{TriggerKind::Aion, TriggerKind::DeltaT, TriggerKind::DeltaEv};
  std::vector<double> bounds{0.1, 0.05, 0.01};
  std::size_t max_k = 30;
  std::size_t grid_bins = 1'000;
  std::filesystem::path out_dir;
};

struct StalenessRow {
  std::size_t k = 0;
  TriggerKind trigger = TriggerKind::Aion;
  std::string distribution;
  double max_staleness = 0;
};

struct BoundRow {
  std::string distribution;
  TriggerKind trigger = TriggerKind::Aion;
  double bound = 0;
  std::optional<std::size_t> executions;
};

struct TriggerStudy {
  std::vector<StalenessRow> staleness;
  std::vector<BoundRow> bounds;

  std::optional<std::size_t> executions(std::string_view distribution, TriggerKind trigger, double bound) const;
};

/// Max staleness for k = 1..max_k and executions needed per bound, on the
/// normalized horizon T = 1.
TriggerStudy run_trigger_study(const TriggerStudyConfig& config);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<WatermarkMetrics>& series);

}  // namespace latewin::bench
