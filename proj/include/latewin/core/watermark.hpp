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

#include <optional>

#include "latewin/core/event.hpp"

namespace latewin {

enum class WatermarkKind { Periodic, Punctuated };

struct Watermark {
  TimeMs timestamp = 0;
  WatermarkKind kind = WatermarkKind::Periodic;
};

/// Emits `max observed event_time - delay_allowance` every `period` of
/// processing time. Nothing is emitted before the first event, and emitted
/// timestamps never go backwards.
class PeriodicWatermarkSource {
 public:
  PeriodicWatermarkSource(TimeMs period, TimeMs delay_allowance);

  void observe(TimeMs event_time) noexcept;

  /// Returns a watermark when `now` reached the next emission tick.
  std::optional<Watermark> poll(TimeMs now);

  TimeMs period() const noexcept { return period_; }

 private:
  TimeMs period_;
  TimeMs allowance_;
  std::optional<TimeMs> max_seen_;
  std::optional<TimeMs> next_tick_;
  std::optional<TimeMs> last_emitted_;
};

}  // namespace latewin
