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

#include "latewin/io/serializer.hpp"

#include <stdexcept>
#include <thread>

#include <boost/asio/post.hpp>

#include "latewin/state/codec.hpp"

namespace latewin::io {

SerializationPool::SerializationPool(std::size_t workers, std::chrono::nanoseconds codec_cost_per_event)
    : workers_(workers), cost_(codec_cost_per_event), pool_(workers == 0 ? 1 : workers) {
  if (workers == 0) throw std::invalid_argument("serialization pool needs at least one worker");
}

SerializationPool::~SerializationPool() { pool_.join(); }

void SerializationPool::emulate_cost(std::size_t events) const {
  if (cost_.count() > 0 && events > 0) std::this_thread::sleep_for(cost_ * events);
}

std::future<std::string> SerializationPool::encode(std::shared_ptr<const Block> block) {
  auto task = std::make_shared<std::packaged_task<std::string()>>([this, block = std::move(block)] {
    emulate_cost(block->size());
    return encode_block(*block);
  });
  auto fut = task->get_future();
  boost::asio::post(pool_, [task] { (*task)(); });
  return fut;
}

std::future<Block> SerializationPool::decode(std::string bytes, std::size_t capacity) {
  auto task = std::make_shared<std::packaged_task<Block()>>(
      [this, bytes = std::move(bytes), capacity] {
        Block b = decode_block(bytes, capacity);
        emulate_cost(b.size());
        return b;
      });
  auto fut = task->get_future();
  boost::asio::post(pool_, [task] { (*task)(); });
  return fut;
}

std::vector<std::string> serialize_blocks(std::span<const Block> blocks, SerializationPool& pool) {
  std::vector<std::future<std::string>> pending;
  pending.reserve(blocks.size());
  for (const auto& b : blocks) {
    // Non-owning alias: the caller's span outlives the futures we wait on.
    pending.push_back(pool.encode(std::shared_ptr<const Block>(std::shared_ptr<void>(), &b)));
  }
  std::vector<std::string> out;
  out.reserve(blocks.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

std::vector<std::string> serialize_blocks(std::span<const Block> blocks, std::size_t worker_count) {
  SerializationPool pool(worker_count);
  return serialize_blocks(blocks, pool);
}

std::vector<Block> deserialize_blocks(std::span<const std::string> encoded, SerializationPool& pool,
                                      std::size_t capacity) {
  std::vector<std::future<Block>> pending;
  pending.reserve(encoded.size());
  for (const auto& e : encoded) pending.push_back(pool.decode(e, capacity));
  std::vector<Block> out;
  out.reserve(encoded.size());
  std::exception_ptr first_error;
  for (auto& f : pending) {
    try {
      out.push_back(f.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace latewin::io
