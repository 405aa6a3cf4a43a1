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

#include "latewin/engine/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>
#include <tuple>

namespace latewin {

namespace {

constexpr std::size_t kTagBytes = 2 + 8 + 8 + 4;

template <typename T>
void put(Bytes& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename T>
T get(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void Pipeline::add_source(std::string name) {
  if (has_source(name) || find_operator(name))
    throw std::invalid_argument("duplicate pipeline node: " + name);
  sources_.push_back(std::move(name));
}

std::size_t Pipeline::add_operator(OperatorSpec spec) {
  if (spec.name.empty()) throw std::invalid_argument("operator needs a name");
  if (has_source(spec.name) || find_operator(spec.name))
    throw std::invalid_argument("duplicate pipeline node: " + spec.name);
  if (!spec.udf) throw std::invalid_argument("operator " + spec.name + " has no function");
  if (spec.inputs.empty()) throw std::invalid_argument("operator " + spec.name + " has no inputs");
  for (const auto& in : spec.inputs)
    if (!has_source(in) && !find_operator(in))
      throw std::invalid_argument("operator " + spec.name + " reads unknown input " + in);
  spec.window.validate();
  if (operators_.size() >= 0xffff) throw std::invalid_argument("too many operators");
  operators_.push_back(std::move(spec));
  return operators_.size() - 1;
}

std::optional<std::size_t> Pipeline::find_operator(std::string_view name) const {
  for (std::size_t i = 0; i < operators_.size(); ++i)
    if (operators_[i].name == name) return i;
  return std::nullopt;
}

bool Pipeline::has_source(std::string_view name) const {
  return std::find(sources_.begin(), sources_.end(), name) != sources_.end();
}

Bytes tag_emission(std::uint16_t origin, const WindowInstance& window, std::uint32_t firing_seq,
                   std::span<const std::uint8_t> body) {
  Bytes out;
  out.reserve(kTagBytes + body.size());
  put(out, origin);
  put(out, window.start);
  put(out, window.end);
  put(out, firing_seq);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

EmittedEvent decode_emission(const Event& event) {
  if (event.payload.size() < kTagBytes) throw std::invalid_argument("event carries no emission tag");
  const auto* p = event.payload.data();
  EmittedEvent out;
  out.origin = get<std::uint16_t>(p);
  out.origin_start = get<TimeMs>(p + 2);
  out.origin_end = get<TimeMs>(p + 10);
  out.firing_seq = get<std::uint32_t>(p + 18);
  out.key = event.key;
  out.body.assign(event.payload.begin() + kTagBytes, event.payload.end());
  return out;
}

std::vector<EmittedEvent> latest_emissions(EventCursor& cursor) {
  using Origin = std::tuple<std::uint16_t, TimeMs, TimeMs>;
  std::map<Origin, std::pair<std::uint32_t, std::vector<EmittedEvent>>> latest;
  while (const Event* e = cursor.next()) {
    EmittedEvent em = decode_emission(*e);
    auto& slot = latest[{em.origin, em.origin_start, em.origin_end}];
    if (slot.second.empty() || em.firing_seq > slot.first) {
      slot.first = em.firing_seq;
      slot.second.clear();
    } else if (em.firing_seq < slot.first) {
      continue;
    }
    slot.second.push_back(std::move(em));
  }
  std::vector<EmittedEvent> out;
  for (auto& [origin, slot] : latest) {
    std::sort(slot.second.begin(), slot.second.end(), [](const EmittedEvent& a, const EmittedEvent& b) {
      return std::tie(a.key, a.body) < std::tie(b.key, b.body);
    });
    for (auto& em : slot.second)
      if (!is_firing_marker(em)) out.push_back(std::move(em));
  }
  return out;
}

}  // namespace latewin
