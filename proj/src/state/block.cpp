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

#include "latewin/state/block.hpp"

#include <cassert>

namespace latewin {

void Block::push(Event event) {
  assert(!full());
  byte_size_ += event.footprint();
  events_.push_back(std::move(event));
}

Block Block::split_tail(std::size_t n) {
  Block tail(capacity_);
  for (std::size_t i = n; i < events_.size(); ++i) tail.push(std::move(events_[i]));
  events_.resize(std::min(n, events_.size()));
  byte_size_ = 0;
  for (const auto& e : events_) byte_size_ += e.footprint();
  return tail;
}

}  // namespace latewin
