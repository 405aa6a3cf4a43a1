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
#include <string>
#include <vector>

namespace latewin {

/// Milliseconds, used for both event time and the engine's processing time.
using TimeMs = std::int64_t;

using Bytes = std::vector<std::uint8_t>;

struct Event {
  std::string key;
  TimeMs event_time = 0;
  Bytes payload;

  std::size_t payload_size() const noexcept { return payload.size(); }

  /// Bytes this event keeps alive on the heap, including the object itself.
  std::size_t footprint() const noexcept;

  friend bool operator==(const Event&, const Event&) = default;
};

}  // namespace latewin
