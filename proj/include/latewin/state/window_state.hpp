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

#include <cstddef>
#include <memory>
#include <string_view>

#include "latewin/core/event.hpp"
#include "latewin/core/window.hpp"
#include "latewin/io/request.hpp"

namespace latewin {

enum class Phase { Active, Destaged, Prestaging, Staged, Purged };
enum class Tier { Memory, Persistent };

std::string_view to_string(Phase phase) noexcept;

struct AppendReceipt {
  Tier tier = Tier::Memory;
};

/// Pull-style iterator over one window's events. next() returns nullptr at
/// the end; the pointer stays valid until the following call. Must be
/// drained (or destroyed) before the window receives another append.
class EventCursor {
 public:
  virtual ~EventCursor() = default;
  virtual const Event* next() = 0;
};

struct CursorOptions {
  /// Blocks of on-demand staging kept ahead of the consumer; 0 = all.
  std::size_t lookahead_blocks = 0;
  /// Drop staged copies once consumed (non-blocking operators).
  bool release_consumed = false;
};

/// State of one window instance, either tiered or memory-only.
class WindowState {
 public:
  virtual ~WindowState() = default;

  virtual const WindowInstance& window() const noexcept = 0;
  virtual Phase phase() const = 0;

  /// Throws PurgedWindow after purge().
  virtual AppendReceipt append(Event event, TimeMs now) = 0;

  /// Throws PurgedWindow after purge().
  virtual std::unique_ptr<EventCursor> iterate(CursorOptions options = {}) = 0;

  /// Events currently held by the memory tier (m-bucket), staged copies
  /// included.
  virtual std::size_t memory_events() const = 0;
  /// Events stored or on their way to storage (p-bucket).
  virtual std::size_t persistent_events() const = 0;
  /// Distinct events of the window.
  virtual std::size_t total_events() const = 0;
  virtual std::size_t memory_bytes() const = 0;

  /// Moves all but the first ceil(keep_fraction * total) events to storage.
  virtual void destage(double keep_fraction) = 0;

  /// Starts staging the persistent tier back to memory. The returned ticket is
  /// invalid when nothing needs reading.
  virtual io::Ticket stage() = 0;

  /// True when every persistent block has a staged copy in memory.
  virtual bool fully_staged() const = 0;

  /// Frees staged copies after a re-execution; resident events stay.
  virtual void release_staged() = 0;

  /// Submits buffered late events older than `max_age` (or all when
  /// `force`) as a write request.
  virtual void flush_late(TimeMs now, TimeMs max_age, bool force = false) = 0;

  /// Deletes all state; idempotent.
  virtual void purge() = 0;

  /// Events whose storage write has not completed yet.
  virtual std::size_t in_transit_events() const = 0;
};

}  // namespace latewin
