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

#include <string>
#include <string_view>

#include "latewin/core/event.hpp"
#include "latewin/state/block.hpp"

namespace latewin {

std::string base64_encode(const std::uint8_t* data, std::size_t size);
inline std::string base64_encode(const Bytes& bytes) {
  return base64_encode(bytes.data(), bytes.size());
}

/// Throws std::invalid_argument on malformed input.
Bytes base64_decode(std::string_view text);

/// One newline-terminated JSON object per event:
///   {"k":"<key>","ts":<event_time>,"p":"<base64 payload>"}
/// An empty block encodes to an empty string.
std::string encode_block(const Block& block);

/// Appends the encoding of one event to `out`.
void encode_event(const Event& event, std::string& out);

/// Inverse of encode_block. Accepts the three fields in any order with
/// optional whitespace. Throws CorruptBlock carrying the record index.
Block decode_block(std::string_view bytes, std::size_t capacity = kDefaultBlockCapacity);

}  // namespace latewin
