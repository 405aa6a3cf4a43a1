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

#include "latewin/core/event.hpp"

namespace latewin {

std::size_t Event::footprint() const noexcept {
  std::size_t bytes = sizeof(Event) + payload.capacity();
  // Keys longer than the small-string buffer live on the heap.
  if (key.capacity() > std::string().capacity()) bytes += key.capacity() + 1;
  return bytes;
}

}  // namespace latewin
