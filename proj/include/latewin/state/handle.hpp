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
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>

#include "latewin/io/scheduler.hpp"
#include "latewin/io/serializer.hpp"
#include "latewin/state/block.hpp"
#include "latewin/state/memory_tracker.hpp"
#include "latewin/state/pbucket.hpp"
#include "latewin/state/window_state.hpp"

namespace latewin {

struct TieredConfig {
  std::size_t block_capacity = kDefaultBlockCapacity;
  /// m-bucket capacity in events for the Active phase.
  std::size_t mbucket_capacity = 500'000;
  /// Injected per-block storage latency, applied to every read and write.
  std::chrono::microseconds io_latency_per_block{0};
};

/// Services shared by all tiered handles of one operator.
struct TieredEnv {
  io::IoScheduler* io = nullptr;
  io::SerializationPool* pool = nullptr;
  MemoryTracker* tracker = nullptr;
  std::filesystem::path dir;
  TieredConfig config;
};

/// Wall-clock measurement of one completed stage() plan.
struct StageStats {
  std::size_t events = 0;
  std::chrono::nanoseconds elapsed{0};
};

/// Window state split into an m-bucket (resident blocks plus staged copies)
/// and a file-backed p-bucket. All file access runs on the storage worker;
/// the owning operator thread only plans transfers.
///
/// Phases: Active -> Destaged -> (Prestaging -> Staged -> Destaged)* -> Purged.
/// Routing: appends go to memory only while Active and below capacity;
/// otherwise they are batched into late-write requests.
class WindowStateHandle final : public WindowState,
                                public std::enable_shared_from_this<WindowStateHandle> {
 public:
  static std::shared_ptr<WindowStateHandle> create(WindowInstance window, TieredEnv env);
  ~WindowStateHandle() override;

  const WindowInstance& window() const noexcept override { return window_; }
  Phase phase() const override;
  AppendReceipt append(Event event, TimeMs now) override;
  std::unique_ptr<EventCursor> iterate(CursorOptions options = {}) override;
  std::size_t memory_events() const override;
  std::size_t persistent_events() const override;
  std::size_t total_events() const override;
  std::size_t memory_bytes() const override;
  std::size_t in_transit_events() const override;

  /// Keeps the first ceil(keep_fraction * total) resident events (capped at
  /// what is resident), hands the rest to one Destage request and drops
  /// staged copies. Valid in Active, Staged and Destaged.
  void destage(double keep_fraction) override;

  /// Reclaims queued destage blocks, then reads every unstaged p-bucket
  /// block. Phase becomes Prestaging until the reads land, then Staged.
  io::Ticket stage() override;

  bool fully_staged() const override;
  void release_staged() override;
  void flush_late(TimeMs now, TimeMs max_age, bool force = false) override;
  void purge() override;

  const PBucket& pbucket() const noexcept { return pbucket_; }
  std::size_t resident_events() const;
  std::size_t staged_blocks() const;

  /// Pops the measurement of the last completed stage() plan.
  std::optional<StageStats> take_stage_stats();

 private:
  class DestageTask;
  class LateWriteTask;
  class StageTask;
  class Cursor;

  struct Transit {
    std::shared_ptr<const Block> block;
    bool destage = false;
    bool writing = false;
  };

  WindowStateHandle(WindowInstance window, TieredEnv env);

  // Called with mu_ held.
  void seal_late_locked();
  void submit_stage_locked(std::vector<std::size_t> indices, bool counts_as_plan);
  void maybe_staged_locked();
  void track(std::int64_t bytes);

  // Storage-worker callbacks.
  bool claim(std::uint64_t transit_id);
  void complete_write(std::uint64_t transit_id, const BlockIndexEntry& entry, std::size_t index);
  void abort_write(std::uint64_t transit_id);
  bool begin_io();
  void end_io();
  void publish_staged(std::size_t index, Block block);
  void stage_finished(const std::vector<std::size_t>& unpublished, std::exception_ptr error);

  // Cursor helpers.
  std::shared_ptr<const Block> wait_staged(std::size_t index);
  void request_stage(const std::vector<std::size_t>& indices);
  void release_one(std::size_t index);

  WindowInstance window_;
  TieredEnv env_;
  PBucket pbucket_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  Phase phase_ = Phase::Active;

  std::vector<std::shared_ptr<Block>> resident_;
  std::size_t resident_events_ = 0;
  std::size_t resident_bytes_ = 0;

  std::shared_ptr<Block> late_buffer_;
  TimeMs late_since_ = 0;

  std::map<std::uint64_t, Transit> transit_;
  std::uint64_t next_transit_ = 0;
  std::size_t transit_events_ = 0;
  std::size_t transit_bytes_ = 0;

  std::map<std::size_t, std::shared_ptr<const Block>> staged_;
  std::size_t staged_events_ = 0;
  std::size_t staged_bytes_ = 0;
  std::set<std::size_t> requested_;
  std::map<std::size_t, std::string> failed_;

  // Written p-bucket blocks, mirrored here so block numbers are assigned
  // under mu_.
  std::size_t p_blocks_ = 0;
  std::size_t p_events_ = 0;

  int io_active_ = 0;

  // Current stage() plan.
  bool plan_open_ = false;
  std::size_t plan_events_ = 0;
  std::chrono::steady_clock::time_point plan_start_{};
  std::optional<StageStats> last_stage_;
  io::Ticket plan_ticket_;
};

}  // namespace latewin
