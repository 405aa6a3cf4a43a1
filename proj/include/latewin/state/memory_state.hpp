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

#include <vector>

#include "latewin/state/memory_tracker.hpp"
#include "latewin/state/window_state.hpp"

namespace latewin {

/// Baseline backend: the whole window lives in memory, like a plain list
/// state. Tier operations are no-ops.
class MemoryWindowState final : public WindowState {
 public:
  MemoryWindowState(WindowInstance window, MemoryTracker* tracker);
  ~MemoryWindowState() override;

  const WindowInstance& window() const noexcept override { return window_; }
  Phase phase() const override { return phase_; }
  AppendReceipt append(Event event, TimeMs now) override;
  std::unique_ptr<EventCursor> iterate(CursorOptions options) override;
  std::size_t memory_events() const override { return events_.size(); }
  std::size_t persistent_events() const override { return 0; }
  std::size_t total_events() const override { return events_.size(); }
  std::size_t memory_bytes() const override { return bytes_; }
  void destage(double) override {}
  io::Ticket stage() override { return {}; }
  bool fully_staged() const override { return true; }
  void release_staged() override {}
  void flush_late(TimeMs, TimeMs, bool) override {}
  void purge() override;
  std::size_t in_transit_events() const override { return 0; }

 private:
  WindowInstance window_;
  MemoryTracker* tracker_;
  Phase phase_ = Phase::Active;
  std::vector<Event> events_;
  std::size_t bytes_ = 0;
};

}  // namespace latewin
