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

#include <chrono>
#include <future>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <boost/asio/thread_pool.hpp>

#include "latewin/state/block.hpp"

namespace latewin::io {

/// CPU pool for block (de)serialization. Never touches files.
///
/// `codec_cost_per_event` emulates a slower codec by sleeping that long per
/// event on the pool thread; zero disables it.
class SerializationPool {
 public:
  explicit SerializationPool(std::size_t workers,
                             std::chrono::nanoseconds codec_cost_per_event = {});
  ~SerializationPool();

  SerializationPool(const SerializationPool&) = delete;
  SerializationPool& operator=(const SerializationPool&) = delete;

  std::size_t workers() const noexcept { return workers_; }

  std::future<std::string> encode(std::shared_ptr<const Block> block);
  std::future<Block> decode(std::string bytes, std::size_t capacity);

 private:
  void emulate_cost(std::size_t events) const;

  std::size_t workers_;
  std::chrono::nanoseconds cost_;
  boost::asio::thread_pool pool_;
};

/// Encodes blocks on `pool`, returning the encodings in input order.
std::vector<std::string> serialize_blocks(std::span<const Block> blocks, SerializationPool& pool);

/// Convenience overload using a temporary pool of `worker_count` threads.
std::vector<std::string> serialize_blocks(std::span<const Block> blocks, std::size_t worker_count);

/// Decodes encodings in parallel, preserving order. Propagates CorruptBlock.
std::vector<Block> deserialize_blocks(std::span<const std::string> encoded, SerializationPool& pool,
                                      std::size_t capacity = kDefaultBlockCapacity);

}  // namespace latewin::io
