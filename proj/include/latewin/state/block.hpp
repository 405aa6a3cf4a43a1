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
#include <vector>

#include "latewin/core/event.hpp"

namespace latewin {

inline constexpr std::size_t kDefaultBlockCapacity = 10'000;

/// Unit of serialization and of transfer between tiers. Events keep their
/// append order.
class Block {
 public:
  explicit Block(std::size_t capacity = kDefaultBlockCapacity) : capacity_(capacity) {}

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  bool full() const noexcept { return events_.size() >= capacity_; }

  /// Heap bytes held by the events of this block.
  std::size_t byte_size() const noexcept { return byte_size_; }

  /// Precondition: !full().
  void push(Event event);

  const std::vector<Event>& events() const noexcept { return events_; }

  std::vector<Event> take_events() && { return std::move(events_); }

  /// Splits off events [n, size) into a new block with the same capacity.
  Block split_tail(std::size_t n);

 private:
  std::size_t capacity_;
  std::size_t byte_size_ = 0;
  std::vector<Event> events_;
};

}  // namespace latewin
