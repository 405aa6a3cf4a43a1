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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "latewin/core/event.hpp"
#include "latewin/core/watermark.hpp"

namespace latewin {

enum class WindowKind { Tumbling, Sliding, Session, Count };

/// Window assignment rule. Build through the named factories, which validate.
struct WindowSpec {
  WindowKind kind = WindowKind::Tumbling;
  TimeMs size = 0;
  TimeMs slide = 0;
  TimeMs gap = 0;
  std::int64_t count = 0;

  static WindowSpec tumbling(TimeMs size);
  static WindowSpec sliding(TimeMs size, TimeMs slide);
  static WindowSpec session(TimeMs gap);
  static WindowSpec count_of(std::int64_t n);

  /// Throws std::invalid_argument when the kind's parameter constraints fail.
  void validate() const;

  bool is_time_based() const noexcept { return kind != WindowKind::Count; }
};

/// Identity of one window instance: unique per (key, start, end).
struct WindowId {
  std::string key;
  TimeMs start = 0;
  TimeMs end = 0;

  /// Filesystem-safe rendering, e.g. `6b6579_20000_30000` (key hex, or `_`
  /// when unkeyed).
  std::string str() const;

  friend auto operator<=>(const WindowId&, const WindowId&) = default;
  friend bool operator==(const WindowId&, const WindowId&) = default;
};

struct WindowInstance {
  std::string key;
  TimeMs start = 0;  // inclusive
  TimeMs end = 0;    // exclusive

  WindowId id() const { return {key, start, end}; }
  bool contains(TimeMs t) const noexcept { return t >= start && t < end; }

  friend bool operator==(const WindowInstance&, const WindowInstance&) = default;
};

/// Every time window containing `event`, in ascending start order. Windows
/// carry the event's key. Session specs yield the singleton session
/// [t, t + gap); merging is done by WindowAssigner. Count specs need per-key
/// state and throw std::logic_error here.
std::vector<WindowInstance> assign_windows(const Event& event, const WindowSpec& spec);

/// True iff every window the event belongs to has end <= watermark.
bool is_late(const Event& event, const Watermark& watermark, const WindowSpec& spec);

/// Outcome of a stateful assignment. `merged` lists session windows that were
/// absorbed into `windows.front()` by this event.
struct Assignment {
  std::vector<WindowInstance> windows;
  std::vector<WindowInstance> merged;
  /// Count windows: set when this event completed the window.
  bool count_window_full = false;
};

/// Stateful assigner covering all window kinds, including eager session
/// merging and per-key count windows.
class WindowAssigner {
 public:
  explicit WindowAssigner(WindowSpec spec);

  const WindowSpec& spec() const noexcept { return spec_; }

  Assignment assign(const Event& event);

  /// Forget a session (after its state is purged).
  void forget_session(const WindowInstance& window);

 private:
  WindowSpec spec_;
  // key -> sessions ordered by start
  std::unordered_map<std::string, std::map<TimeMs, TimeMs>> sessions_;
  // key -> (index of open count window, events in it)
  std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> counts_;
};

}  // namespace latewin
