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

#include "latewin/state/memory_state.hpp"

#include "latewin/error.hpp"

namespace latewin {

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Active: return "active";
    case Phase::Destaged: return "destaged";
    case Phase::Prestaging: return "prestaging";
    case Phase::Staged: return "staged";
    case Phase::Purged: return "purged";
  }
  return "?";
}

namespace {

class VectorCursor final : public EventCursor {
 public:
  explicit VectorCursor(const std::vector<Event>& events) : events_(events) {}
  const Event* next() override { return pos_ < events_.size() ? &events_[pos_++] : nullptr; }

 private:
  const std::vector<Event>& events_;
  std::size_t pos_ = 0;
};

}  // namespace

MemoryWindowState::MemoryWindowState(WindowInstance window, MemoryTracker* tracker)
    : window_(std::move(window)), tracker_(tracker) {}

MemoryWindowState::~MemoryWindowState() { purge(); }

AppendReceipt MemoryWindowState::append(Event event, TimeMs) {
  if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
  const std::size_t bytes = event.footprint();
  bytes_ += bytes;
  if (tracker_) tracker_->add(static_cast<std::int64_t>(bytes));
  events_.push_back(std::move(event));
  return {Tier::Memory};
}

std::unique_ptr<EventCursor> MemoryWindowState::iterate(CursorOptions) {
  if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
  return std::make_unique<VectorCursor>(events_);
}

void MemoryWindowState::purge() {
  if (phase_ == Phase::Purged) return;
  phase_ = Phase::Purged;
  if (tracker_) tracker_->sub(static_cast<std::int64_t>(bytes_));
  bytes_ = 0;
  std::vector<Event>().swap(events_);
}

}  // namespace latewin
