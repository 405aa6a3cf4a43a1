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

#include "latewin/core/window.hpp"

#include <algorithm>
#include <stdexcept>

namespace latewin {
namespace {

TimeMs floor_div(TimeMs a, TimeMs b) {
  TimeMs q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

WindowSpec WindowSpec::tumbling(TimeMs size) {
  WindowSpec s{WindowKind::Tumbling, size, size, 0, 0};
  s.validate();
  return s;
}

WindowSpec WindowSpec::sliding(TimeMs size, TimeMs slide) {
  WindowSpec s{WindowKind::Sliding, size, slide, 0, 0};
  s.validate();
  return s;
}

WindowSpec WindowSpec::session(TimeMs gap) {
  WindowSpec s{WindowKind::Session, 0, 0, gap, 0};
  s.validate();
  return s;
}

WindowSpec WindowSpec::count_of(std::int64_t n) {
  WindowSpec s{WindowKind::Count, 0, 0, 0, n};
  s.validate();
  return s;
}

void WindowSpec::validate() const {
  switch (kind) {
    case WindowKind::Tumbling:
      if (size <= 0) throw std::invalid_argument("tumbling window size must be positive");
      break;
    case WindowKind::Sliding:
      if (size <= 0 || slide <= 0 || slide > size)
        throw std::invalid_argument("sliding window needs 0 < slide <= size");
      break;
    case WindowKind::Session:
      if (gap <= 0) throw std::invalid_argument("session gap must be positive");
      break;
    case WindowKind::Count:
      if (count <= 0) throw std::invalid_argument("count window size must be positive");
      break;
  }
}

std::string WindowId::str() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  if (key.empty()) {
    out = "_";
  } else {
    out.reserve(key.size() * 2);
    for (unsigned char c : key) {
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  out += '_' + std::to_string(start) + '_' + std::to_string(end);
  return out;
}

std::vector<WindowInstance> assign_windows(const Event& event, const WindowSpec& spec) {
  const TimeMs t = event.event_time;
  switch (spec.kind) {
    case WindowKind::Tumbling: {
      TimeMs start = floor_div(t, spec.size) * spec.size;
      return {WindowInstance{event.key, start, start + spec.size}};
    }
    case WindowKind::Sliding: {
      std::vector<WindowInstance> out;
      TimeMs last_start = floor_div(t, spec.slide) * spec.slide;
      for (TimeMs start = last_start; start > t - spec.size; start -= spec.slide) {
        out.push_back(WindowInstance{event.key, start, start + spec.size});
      }
      std::reverse(out.begin(), out.end());
      return out;
    }
    case WindowKind::Session:
      return {WindowInstance{event.key, t, t + spec.gap}};
    case WindowKind::Count:
      throw std::logic_error("count windows are stateful; use WindowAssigner");
  }
  return {};
}

bool is_late(const Event& event, const Watermark& watermark, const WindowSpec& spec) {
  if (!spec.is_time_based()) return false;
  for (const auto& w : assign_windows(event, spec)) {
    if (w.end > watermark.timestamp) return false;
  }
  return true;
}

WindowAssigner::WindowAssigner(WindowSpec spec) : spec_(spec) { spec_.validate(); }

Assignment WindowAssigner::assign(const Event& event) {
  Assignment out;
  switch (spec_.kind) {
    case WindowKind::Tumbling:
    case WindowKind::Sliding:
      out.windows = assign_windows(event, spec_);
      return out;
    case WindowKind::Session: {
      auto& sessions = sessions_[event.key];
      TimeMs start = event.event_time;
      TimeMs end = event.event_time + spec_.gap;
      std::vector<std::map<TimeMs, TimeMs>::iterator> overlapping;
      for (auto it = sessions.begin(); it != sessions.end() && it->first < end; ++it) {
        if (start < it->second) overlapping.push_back(it);
      }
      if (overlapping.size() == 1 && overlapping[0]->first <= start &&
          overlapping[0]->second >= end) {
        out.windows.push_back(
            WindowInstance{event.key, overlapping[0]->first, overlapping[0]->second});
        return out;
      }
      for (auto it : overlapping) {
        out.merged.push_back(WindowInstance{event.key, it->first, it->second});
        start = std::min(start, it->first);
        end = std::max(end, it->second);
        sessions.erase(it);
      }
      sessions.emplace(start, end);
      out.windows.push_back(WindowInstance{event.key, start, end});
      return out;
    }
    case WindowKind::Count: {
      auto& [index, filled] = counts_[event.key];
      out.windows.push_back(
          WindowInstance{event.key, index * spec_.count, (index + 1) * spec_.count});
      if (++filled == spec_.count) {
        out.count_window_full = true;
        ++index;
        filled = 0;
      }
      return out;
    }
  }
  return out;
}

void WindowAssigner::forget_session(const WindowInstance& window) {
  auto it = sessions_.find(window.key);
  if (it == sessions_.end()) return;
  it->second.erase(window.start);
  if (it->second.empty()) sessions_.erase(it);
}

}  // namespace latewin
