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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "latewin/core/watermark.hpp"
#include "latewin/engine/config.hpp"
#include "latewin/engine/pipeline.hpp"
#include "latewin/io/scheduler.hpp"
#include "latewin/io/serializer.hpp"
#include "latewin/lateness/histogram.hpp"
#include "latewin/policy/transfer_policy.hpp"
#include "latewin/state/memory_tracker.hpp"
#include "latewin/trigger/staleness.hpp"

namespace latewin {

class WindowStateHandle;

struct FiringRecord {
  std::size_t op = 0;
  WindowId window;
  std::uint32_t firing_seq = 0;
  bool is_refinement = false;
  std::string value;
  TimeMs fired_at = 0;
  std::size_t events = 0;
  /// Wall time from the moment the firing was due to its completion,
  /// including any wait for staging.
  std::chrono::nanoseconds wall{0};
  std::chrono::nanoseconds stage_wait{0};
};

struct WindowSummary {
  std::size_t op = 0;
  WindowId window;
  std::uint32_t reexecutions = 0;
  std::uint64_t events = 0;
  std::uint64_t late_events = 0;
  /// max over result emissions of t*n/(T*N) with N the late events the
  /// window actually received and T its lifetime past the end. Late events
  /// never covered by a firing count as an interval ending at the purge.
  double max_staleness_observed = 0;
  TimeMs purged_at = 0;
};

struct IngestOutcome {
  std::size_t on_time = 0;  // window assignments before the watermark
  std::size_t late = 0;     // late assignments kept
  std::size_t dropped = 0;  // late assignments past the cleanup bound
};

struct EngineCounters {
  std::uint64_t on_time = 0;
  std::uint64_t late = 0;
  std::uint64_t dropped_beyond_bound = 0;
  std::uint64_t dropped_watermarks = 0;
  std::uint64_t initial_firings = 0;
  std::uint64_t reexecutions = 0;
  std::uint64_t failed_firings = 0;
  std::uint64_t cancelled_reexecutions = 0;
  std::uint64_t purges = 0;
  std::uint64_t prestages = 0;
  std::uint64_t pressure_destages = 0;
  std::uint64_t timer_destages = 0;
  std::int64_t peak_state_bytes = 0;
  bool over_budget = false;
};

struct EngineObserver {
  std::function<void(const FiringRecord&)> on_firing;
  std::function<void(const WindowSummary&)> on_purge;
  /// Re-execution schedule installed at a window's initial firing.
  std::function<void(std::size_t op, const WindowId&, const ExecutionSchedule&)> on_schedule;
};

/// Runs a pipeline on the caller's thread. Events, watermarks and ticks are
/// fed with the current processing time; the engine never reads a clock for
/// its decisions, only to measure staging cost.
///
/// Initial firings happen inside advance_watermark. Re-executions, prestage
/// launches, late-write flushes, timers, memory pressure and purges happen in
/// tick(). Window files live in a private directory under state_root that
/// is deleted with the engine.
class Engine {
 public:
  Engine(Pipeline pipeline, EngineConfig config, EngineObserver observer = {});
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Throws std::invalid_argument for an unknown source.
  IngestOutcome ingest(std::string_view source, Event event, TimeMs now);

  /// Returns false (and counts) when the watermark goes backwards.
  bool advance_watermark(const Watermark& watermark, TimeMs now);

  /// Fires pending initial firings first, then every due re-execution in
  /// (due, operator, window) order. Returns the number of firings.
  std::size_t run_reexecutions(TimeMs now);

  /// Purges windows past their cleanup bound; queued re-executions of purged
  /// windows are cancelled. Returns the number purged.
  std::size_t purge_pass(TimeMs now);

  /// Housekeeping: flush late writes, harvest staging times, launch
  /// prestages, run re-executions, purge, timers and memory pressure.
  void tick(TimeMs now);

  /// Writes out buffered late events and waits for storage to go idle.
  void flush(TimeMs now);

  void set_lead_scale(double processing_ms_per_wall_ms) { config_.lead_scale = processing_ms_per_wall_ms; }

  const EngineConfig& config() const noexcept { return config_; }
  const Pipeline& pipeline() const noexcept { return pipeline_; }
  const EngineCounters& counters() const noexcept { return counters_; }
  const LatenessHistogram& histogram(std::size_t op = 0) const;
  CleanupBound current_bound(std::size_t op = 0) const;
  const PrestageEstimator& estimator() const noexcept { return estimator_; }
  std::int64_t tracked_state_bytes() const noexcept { return tracker_.state_bytes(); }
  std::int64_t destage_backlog_bytes() const noexcept { return tracker_.destage_backlog_bytes(); }
  std::size_t live_windows() const;
  std::optional<TimeMs> watermark() const noexcept { return watermark_; }
  /// Null when the window is not live.
  const WindowState* window_state(std::size_t op, const WindowId& id) const;
  std::size_t queued_reexecutions() const;

 private:
  struct Entry;
  struct OperatorRuntime;

  void route(std::size_t op, Event event, TimeMs now, IngestOutcome& outcome);
  Entry& entry_for(OperatorRuntime& rt, const WindowInstance& window, TimeMs now);
  void merge_sessions(OperatorRuntime& rt, const std::vector<WindowInstance>& merged,
                      const WindowInstance& into, TimeMs now);
  void on_late(OperatorRuntime& rt, Entry& e, TimeMs now);
  bool fire(OperatorRuntime& rt, Entry& e, bool refinement, TimeMs now,
            std::chrono::steady_clock::time_point due_wall);
  void after_initial(OperatorRuntime& rt, Entry& e, TimeMs now);
  void install_schedule(OperatorRuntime& rt, Entry& e);
  void advance_plan(Entry& e, TimeMs now);
  void purge_entry(OperatorRuntime& rt, Entry& e, TimeMs now);
  void launch_prestages(TimeMs now);
  void harvest(Entry& e);
  void apply_timers(TimeMs now);
  void apply_pressure(TimeMs now);
  void fire_pending_initial(TimeMs now, std::size_t& fired);
  TimeMs bound_ms(const OperatorRuntime& rt) const;
  std::optional<TimeMs> preceding_expiry(const OperatorRuntime& rt, const Entry& e) const;
  std::shared_ptr<WindowState> make_state(const OperatorRuntime& rt, const WindowInstance& window);

  Pipeline pipeline_;
  EngineConfig config_;
  EngineObserver observer_;

  MemoryTracker tracker_;
  std::filesystem::path session_dir_;
  std::unique_ptr<io::SerializationPool> pool_;
  std::unique_ptr<io::IoScheduler> io_;

  std::vector<std::unique_ptr<OperatorRuntime>> ops_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> source_subscribers_;

  std::optional<TimeMs> watermark_;
  WatermarkKind watermark_kind_ = WatermarkKind::Periodic;
  TimeMs last_watermark_at_ = 0;

  PrestageEstimator estimator_;
  EngineCounters counters_;
};

}  // namespace latewin
