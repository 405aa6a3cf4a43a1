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

#include <atomic>
#include <cstdint>

namespace latewin {

/// Live byte counters shared by every window state of one engine.
class MemoryTracker {
 public:
  void add(std::int64_t bytes) noexcept { state_.fetch_add(bytes, std::memory_order_relaxed); }
  void sub(std::int64_t bytes) noexcept { state_.fetch_sub(bytes, std::memory_order_relaxed); }
  std::int64_t state_bytes() const noexcept { return state_.load(std::memory_order_relaxed); }

  /// Bytes handed to destage requests and not yet written (or reclaimed).
  void add_backlog(std::int64_t bytes) noexcept { backlog_.fetch_add(bytes, std::memory_order_relaxed); }
  void sub_backlog(std::int64_t bytes) noexcept { backlog_.fetch_sub(bytes, std::memory_order_relaxed); }
  std::int64_t destage_backlog_bytes() const noexcept { return backlog_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> state_{0};
  std::atomic<std::int64_t> backlog_{0};
};

}  // namespace latewin
