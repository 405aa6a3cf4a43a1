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

#include "latewin/core/watermark.hpp"

#include <algorithm>
#include <stdexcept>

namespace latewin {

PeriodicWatermarkSource::PeriodicWatermarkSource(TimeMs period, TimeMs delay_allowance)
    : period_(period), allowance_(delay_allowance) {
  if (period <= 0) throw std::invalid_argument("watermark period must be positive");
}

void PeriodicWatermarkSource::observe(TimeMs event_time) noexcept {
  max_seen_ = max_seen_ ? std::max(*max_seen_, event_time) : event_time;
}

std::optional<Watermark> PeriodicWatermarkSource::poll(TimeMs now) {
  if (!next_tick_) next_tick_ = now + period_;
  if (now < *next_tick_) return std::nullopt;
  // Skip ticks missed while the caller was stalled.
  while (*next_tick_ <= now) *next_tick_ += period_;
  if (!max_seen_) return std::nullopt;
  TimeMs ts = *max_seen_ - allowance_;
  if (last_emitted_) ts = std::max(ts, *last_emitted_);
  last_emitted_ = ts;
  return Watermark{ts, WatermarkKind::Periodic};
}

}  // namespace latewin
