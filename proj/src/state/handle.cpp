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

#include "latewin/state/handle.hpp"

#include <cmath>
#include <deque>
#include <thread>

#include "latewin/error.hpp"
#include "latewin/state/codec.hpp"

namespace latewin {

namespace {

void inject_latency(std::chrono::microseconds latency) {
  if (latency.count() > 0) std::this_thread::sleep_for(latency);
}

}  // namespace

// ---------------------------------------------------------------------------
// Storage-worker tasks

class WindowStateHandle::DestageTask final : public io::IoTask {
 public:
  DestageTask(std::shared_ptr<WindowStateHandle> handle,
              std::vector<std::pair<std::uint64_t, std::shared_ptr<const Block>>> blocks)
      : handle_(std::move(handle)), blocks_(std::move(blocks)) {}

  bool step() override {
    while (next_ < blocks_.size()) {
      const std::size_t i = next_++;
      launch_ahead();
      auto encoded = std::move(encoded_.front());
      encoded_.pop_front();
      if (!handle_->claim(blocks_[i].first)) continue;
      try {
        const std::string bytes = encoded.get();
        inject_latency(handle_->env_.config.io_latency_per_block);
        const auto entry = handle_->pbucket_.append(bytes, blocks_[i].second->size());
        handle_->complete_write(blocks_[i].first, entry, handle_->pbucket_.block_count() - 1);
      } catch (...) {
        handle_->abort_write(blocks_[i].first);
        throw;
      }
      return next_ >= blocks_.size();
    }
    return true;
  }

 private:
  // Encodings run ahead of the writes by one block per pool worker.
  void launch_ahead() {
    const std::size_t want = std::min(blocks_.size(), next_ + handle_->env_.pool->workers());
    while (launched_ < want) encoded_.push_back(handle_->env_.pool->encode(blocks_[launched_++].second));
  }

  std::shared_ptr<WindowStateHandle> handle_;
  std::vector<std::pair<std::uint64_t, std::shared_ptr<const Block>>> blocks_;
  std::deque<std::future<std::string>> encoded_;
  std::size_t next_ = 0;
  std::size_t launched_ = 0;
};

class WindowStateHandle::LateWriteTask final : public io::IoTask {
 public:
  LateWriteTask(std::shared_ptr<WindowStateHandle> handle, std::uint64_t id,
                std::shared_ptr<const Block> block)
      : handle_(std::move(handle)), id_(id), count_(block->size()),
        encoded_(handle_->env_.pool->encode(std::move(block))) {}

  bool step() override {
    if (!handle_->claim(id_)) return true;
    try {
      const std::string bytes = encoded_.get();
      inject_latency(handle_->env_.config.io_latency_per_block);
      const auto entry = handle_->pbucket_.append(bytes, count_);
      handle_->complete_write(id_, entry, handle_->pbucket_.block_count() - 1);
    } catch (...) {
      handle_->abort_write(id_);
      throw;
    }
    return true;
  }

 private:
  std::shared_ptr<WindowStateHandle> handle_;
  std::uint64_t id_;
  std::size_t count_;
  std::future<std::string> encoded_;
};

class WindowStateHandle::StageTask final : public io::IoTask {
 public:
  StageTask(std::shared_ptr<WindowStateHandle> handle, std::vector<std::size_t> indices)
      : handle_(std::move(handle)), indices_(std::move(indices)) {}

  bool step() override {
    if (next_ < indices_.size()) {
      if (!handle_->begin_io()) {
        abandoned_ = true;
        return true;
      }
      std::string bytes;
      try {
        const auto index = handle_->pbucket_.index();
        if (indices_[next_] >= index.size()) throw StorageRead("block not in index");
        bytes = handle_->pbucket_.read(index[indices_[next_]]);
        inject_latency(handle_->env_.config.io_latency_per_block);
      } catch (...) {
        handle_->end_io();
        throw;
      }
      handle_->end_io();
      decoding_.emplace_back(indices_[next_],
                             handle_->env_.pool->decode(std::move(bytes), handle_->env_.config.block_capacity));
      ++next_;
      // Keep at most one decode per pool worker in flight.
      while (!decoding_.empty() &&
             (decoding_.size() > handle_->env_.pool->workers() ||
              decoding_.front().second.wait_for(std::chrono::seconds(0)) == std::future_status::ready)) {
        publish_front();
      }
      if (next_ < indices_.size()) return false;
    }
    while (!decoding_.empty()) publish_front();
    return true;
  }

  void finish(std::exception_ptr error, bool) override {
    std::vector<std::size_t> unpublished;
    for (auto& [idx, fut] : decoding_) unpublished.push_back(idx);
    for (std::size_t i = next_; i < indices_.size(); ++i) unpublished.push_back(indices_[i]);
    handle_->stage_finished(unpublished, abandoned_ ? nullptr : error);
  }

 private:
  void publish_front() {
    auto [idx, fut] = std::move(decoding_.front());
    decoding_.pop_front();
    Block block = [&] {
      try {
        return fut.get();
      } catch (const CorruptBlock& e) {
        decoding_.emplace_front(idx, std::future<Block>());
        throw StorageRead(std::string("staging block failed: ") + e.what());
      }
    }();
    handle_->publish_staged(idx, std::move(block));
  }

  std::shared_ptr<WindowStateHandle> handle_;
  std::vector<std::size_t> indices_;
  std::size_t next_ = 0;
  std::deque<std::pair<std::size_t, std::future<Block>>> decoding_;
  bool abandoned_ = false;
};

// ---------------------------------------------------------------------------
// Cursor

class WindowStateHandle::Cursor final : public EventCursor {
 public:
  struct Segment {
    std::shared_ptr<const Block> block;  // null: staged on demand
    std::size_t p_index = npos;
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Cursor(std::shared_ptr<WindowStateHandle> handle, std::vector<Segment> segments, CursorOptions options)
      : handle_(std::move(handle)), segments_(std::move(segments)), options_(options) {
    request_ahead(0);
  }

  const Event* next() override {
    while (true) {
      if (block_ && pos_ < block_->size()) return &block_->events()[pos_++];
      if (block_ && current_p_ != npos && options_.release_consumed) handle_->release_one(current_p_);
      block_.reset();
      current_p_ = npos;
      if (seg_ >= segments_.size()) return nullptr;
      const std::size_t at = seg_++;
      auto& s = segments_[at];
      current_p_ = s.p_index;
      if (s.block) {
        block_ = std::move(s.block);
      } else {
        request_ahead(at);
        block_ = handle_->wait_staged(s.p_index);
      }
      pos_ = 0;
    }
  }

 private:
  void request_ahead(std::size_t from) {
    std::vector<std::size_t> want;
    for (std::size_t i = from; i < segments_.size(); ++i) {
      if (segments_[i].block || segments_[i].p_index == npos) continue;
      want.push_back(segments_[i].p_index);
      if (options_.lookahead_blocks != 0 && want.size() >= options_.lookahead_blocks) break;
    }
    if (!want.empty()) handle_->request_stage(want);
  }

  std::shared_ptr<WindowStateHandle> handle_;
  std::vector<Segment> segments_;
  CursorOptions options_;
  std::size_t seg_ = 0;
  std::shared_ptr<const Block> block_;
  std::size_t current_p_ = npos;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Handle

std::shared_ptr<WindowStateHandle> WindowStateHandle::create(WindowInstance window, TieredEnv env) {
  return std::shared_ptr<WindowStateHandle>(new WindowStateHandle(std::move(window), std::move(env)));
}

WindowStateHandle::WindowStateHandle(WindowInstance window, TieredEnv env)
    : window_(std::move(window)), env_(std::move(env)), pbucket_(env_.dir / window_.id().str()) {}

WindowStateHandle::~WindowStateHandle() {
  // Tasks hold shared ownership, so nothing of ours is in flight here.
  const std::int64_t bytes = static_cast<std::int64_t>(resident_bytes_ + transit_bytes_ + staged_bytes_ +
                                                       (late_buffer_ ? late_buffer_->byte_size() : 0));
  if (phase_ != Phase::Purged && env_.tracker) env_.tracker->sub(bytes);
}

void WindowStateHandle::track(std::int64_t bytes) {
  if (env_.tracker) env_.tracker->add(bytes);
}

Phase WindowStateHandle::phase() const {
  std::lock_guard lock(mu_);
  return phase_;
}

AppendReceipt WindowStateHandle::append(Event event, TimeMs now) {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
  const auto bytes = event.footprint();
  track(static_cast<std::int64_t>(bytes));
  if (phase_ == Phase::Active && resident_events_ < env_.config.mbucket_capacity) {
    if (resident_.empty() || resident_.back()->full()) {
      resident_.push_back(std::make_shared<Block>(env_.config.block_capacity));
    }
    resident_.back()->push(std::move(event));
    ++resident_events_;
    resident_bytes_ += bytes;
    return {Tier::Memory};
  }
  if (!late_buffer_) {
    late_buffer_ = std::make_shared<Block>(env_.config.block_capacity);
    late_since_ = now;
  }
  late_buffer_->push(std::move(event));
  if (late_buffer_->full()) seal_late_locked();
  return {Tier::Persistent};
}

void WindowStateHandle::seal_late_locked() {
  if (!late_buffer_ || late_buffer_->empty()) return;
  auto block = std::shared_ptr<const Block>(std::move(late_buffer_));
  late_buffer_.reset();
  const std::uint64_t id = next_transit_++;
  transit_.emplace(id, Transit{block, false, false});
  transit_events_ += block->size();
  transit_bytes_ += block->byte_size();
  env_.io->submit(io::IORequest{io::RequestKind::LateWrite, window_.id().str(),
                                std::make_unique<LateWriteTask>(shared_from_this(), id, block)});
}

void WindowStateHandle::flush_late(TimeMs now, TimeMs max_age, bool force) {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged || !late_buffer_ || late_buffer_->empty()) return;
  if (force || now - late_since_ >= max_age) seal_late_locked();
}

std::unique_ptr<EventCursor> WindowStateHandle::iterate(CursorOptions options) {
  std::vector<Cursor::Segment> segments;
  {
    std::lock_guard lock(mu_);
    if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
    seal_late_locked();
    for (const auto& b : resident_) segments.push_back({b, Cursor::npos});
    for (std::size_t i = 0; i < p_blocks_; ++i) {
      auto it = staged_.find(i);
      segments.push_back({it != staged_.end() ? it->second : nullptr, i});
    }
    for (const auto& [id, t] : transit_) segments.push_back({t.block, Cursor::npos});
  }
  return std::make_unique<Cursor>(shared_from_this(), std::move(segments), options);
}

void WindowStateHandle::destage(double keep_fraction) {
  std::vector<std::pair<std::uint64_t, std::shared_ptr<const Block>>> outgoing;
  {
    std::lock_guard lock(mu_);
    if (phase_ == Phase::Purged || phase_ == Phase::Prestaging) return;
    // Staged copies are already persistent.
    track(-static_cast<std::int64_t>(staged_bytes_));
    staged_.clear();
    staged_events_ = staged_bytes_ = 0;

    const std::size_t total = resident_events_ + p_events_ + transit_events_ +
                              (late_buffer_ ? late_buffer_->size() : 0);
    const double f = std::clamp(keep_fraction, 0.0, 1.0);
    const auto keep = std::min<std::size_t>(
        resident_events_, static_cast<std::size_t>(std::ceil(f * static_cast<double>(total) - 1e-9)));

    std::vector<std::shared_ptr<Block>> kept;
    std::size_t kept_events = 0;
    for (auto& block : resident_) {
      if (kept_events + block->size() <= keep) {
        kept_events += block->size();
        kept.push_back(std::move(block));
        continue;
      }
      std::shared_ptr<Block> moving = block;
      if (kept_events < keep) {
        // Split into fresh blocks: an older destage may still be encoding
        // this one.
        auto head = std::make_shared<Block>(*block);
        moving = std::make_shared<Block>(head->split_tail(keep - kept_events));
        kept_events += head->size();
        kept.push_back(std::move(head));
      }
      const std::uint64_t id = next_transit_++;
      transit_.emplace(id, Transit{moving, true, false});
      transit_events_ += moving->size();
      transit_bytes_ += moving->byte_size();
      if (env_.tracker) env_.tracker->add_backlog(static_cast<std::int64_t>(moving->byte_size()));
      outgoing.emplace_back(id, std::move(moving));
    }
    resident_ = std::move(kept);
    resident_events_ = 0;
    resident_bytes_ = 0;
    for (const auto& b : resident_) {
      resident_events_ += b->size();
      resident_bytes_ += b->byte_size();
    }
    phase_ = Phase::Destaged;
    if (!outgoing.empty()) {
      env_.io->submit(io::IORequest{io::RequestKind::Destage, window_.id().str(),
                                    std::make_unique<DestageTask>(shared_from_this(), std::move(outgoing))});
    }
  }
}

io::Ticket WindowStateHandle::stage() {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
  // Pull back destage blocks the worker has not started writing.
  for (auto it = transit_.begin(); it != transit_.end();) {
    if (it->second.destage && !it->second.writing) {
      auto block = std::const_pointer_cast<Block>(it->second.block);
      transit_events_ -= block->size();
      transit_bytes_ -= block->byte_size();
      if (env_.tracker) env_.tracker->sub_backlog(static_cast<std::int64_t>(block->byte_size()));
      resident_events_ += block->size();
      resident_bytes_ += block->byte_size();
      resident_.push_back(std::move(block));
      it = transit_.erase(it);
    } else {
      ++it;
    }
  }
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < p_blocks_; ++i) {
    if (!staged_.count(i) && !requested_.count(i)) missing.push_back(i);
  }
  const bool from_destaged = phase_ != Phase::Active;
  if (from_destaged) phase_ = Phase::Prestaging;
  plan_open_ = true;
  plan_events_ = 0;
  for (std::size_t i = 0; i < p_blocks_; ++i) {
    if (!staged_.count(i)) plan_events_ += pbucket_.index()[i].count;
  }
  plan_start_ = std::chrono::steady_clock::now();
  plan_ticket_ = {};
  if (!missing.empty()) submit_stage_locked(std::move(missing), true);
  io::Ticket ticket = plan_ticket_;
  maybe_staged_locked();
  return ticket;
}

void WindowStateHandle::submit_stage_locked(std::vector<std::size_t> indices, bool counts_as_plan) {
  for (auto i : indices) {
    requested_.insert(i);
    failed_.erase(i);
  }
  auto ticket = env_.io->submit(io::IORequest{io::RequestKind::Stage, window_.id().str(),
                                              std::make_unique<StageTask>(shared_from_this(), std::move(indices))});
  if (counts_as_plan) plan_ticket_ = ticket;
}

void WindowStateHandle::maybe_staged_locked() {
  if (!requested_.empty()) return;
  for (std::size_t i = 0; i < p_blocks_; ++i) {
    if (!staged_.count(i)) return;
  }
  if (phase_ == Phase::Prestaging) phase_ = Phase::Staged;
  if (plan_open_) {
    plan_open_ = false;
    last_stage_ = StageStats{plan_events_, std::chrono::steady_clock::now() - plan_start_};
  }
  cv_.notify_all();
}

bool WindowStateHandle::fully_staged() const {
  std::lock_guard lock(mu_);
  if (!requested_.empty()) return false;
  for (std::size_t i = 0; i < p_blocks_; ++i) {
    if (!staged_.count(i)) return false;
  }
  return true;
}

void WindowStateHandle::release_staged() {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) return;
  track(-static_cast<std::int64_t>(staged_bytes_));
  staged_.clear();
  staged_events_ = staged_bytes_ = 0;
  if (phase_ == Phase::Staged || phase_ == Phase::Prestaging) phase_ = Phase::Destaged;
  plan_open_ = false;
}

void WindowStateHandle::purge() {
  std::unique_lock lock(mu_);
  if (phase_ == Phase::Purged) return;
  phase_ = Phase::Purged;
  if (plan_ticket_.valid()) plan_ticket_.cancel();
  cv_.wait(lock, [&] { return io_active_ == 0; });
  for (const auto& [id, t] : transit_) {
    if (t.destage && env_.tracker) env_.tracker->sub_backlog(static_cast<std::int64_t>(t.block->byte_size()));
  }
  const std::int64_t bytes = static_cast<std::int64_t>(resident_bytes_ + transit_bytes_ + staged_bytes_ +
                                                       (late_buffer_ ? late_buffer_->byte_size() : 0));
  track(-bytes);
  resident_.clear();
  transit_.clear();
  staged_.clear();
  late_buffer_.reset();
  resident_events_ = resident_bytes_ = transit_events_ = transit_bytes_ = 0;
  staged_events_ = staged_bytes_ = 0;
  requested_.clear();
  pbucket_.remove();
  p_blocks_ = p_events_ = 0;
  cv_.notify_all();
}

bool WindowStateHandle::claim(std::uint64_t id) {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) return false;
  auto it = transit_.find(id);
  if (it == transit_.end() || it->second.writing) return false;
  it->second.writing = true;
  ++io_active_;
  return true;
}

void WindowStateHandle::complete_write(std::uint64_t id, const BlockIndexEntry& entry, std::size_t index) {
  std::lock_guard lock(mu_);
  --io_active_;
  auto it = transit_.find(id);
  if (it != transit_.end()) {
    const auto& block = it->second.block;
    transit_events_ -= block->size();
    transit_bytes_ -= block->byte_size();
    if (it->second.destage && env_.tracker)
      env_.tracker->sub_backlog(static_cast<std::int64_t>(block->byte_size()));
    p_blocks_ = std::max(p_blocks_, index + 1);
    p_events_ += entry.count;
    if (phase_ == Phase::Prestaging || phase_ == Phase::Staged) {
      // Keep the written block as its own staged copy.
      staged_[index] = block;
      staged_events_ += block->size();
      staged_bytes_ += block->byte_size();
    } else {
      track(-static_cast<std::int64_t>(block->byte_size()));
    }
    transit_.erase(it);
  }
  cv_.notify_all();
}

void WindowStateHandle::abort_write(std::uint64_t id) {
  std::lock_guard lock(mu_);
  --io_active_;
  auto it = transit_.find(id);
  if (it != transit_.end()) it->second.writing = false;
  cv_.notify_all();
}

bool WindowStateHandle::begin_io() {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) return false;
  ++io_active_;
  return true;
}

void WindowStateHandle::end_io() {
  std::lock_guard lock(mu_);
  --io_active_;
  cv_.notify_all();
}

void WindowStateHandle::publish_staged(std::size_t index, Block block) {
  std::lock_guard lock(mu_);
  requested_.erase(index);
  if (phase_ == Phase::Purged) return;
  if (!staged_.count(index)) {
    auto shared = std::make_shared<const Block>(std::move(block));
    staged_events_ += shared->size();
    staged_bytes_ += shared->byte_size();
    track(static_cast<std::int64_t>(shared->byte_size()));
    staged_.emplace(index, std::move(shared));
  }
  maybe_staged_locked();
  cv_.notify_all();
}

void WindowStateHandle::stage_finished(const std::vector<std::size_t>& unpublished, std::exception_ptr error) {
  std::lock_guard lock(mu_);
  std::string message = "stage failed";
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const std::exception& e) {
      message = e.what();
    }
  }
  for (auto i : unpublished) {
    requested_.erase(i);
    if (error) failed_[i] = message;
  }
  if (error && phase_ == Phase::Prestaging) {
    phase_ = Phase::Destaged;
    plan_open_ = false;
  }
  if (!error) maybe_staged_locked();
  cv_.notify_all();
}

std::shared_ptr<const Block> WindowStateHandle::wait_staged(std::size_t index) {
  std::unique_lock lock(mu_);
  while (true) {
    if (phase_ == Phase::Purged) throw PurgedWindow(window_.id().str());
    if (auto it = staged_.find(index); it != staged_.end()) return it->second;
    if (auto it = failed_.find(index); it != failed_.end()) {
      std::string message = it->second;
      failed_.erase(it);
      throw StorageRead(message);
    }
    if (!requested_.count(index)) submit_stage_locked({index}, false);
    cv_.wait(lock);
  }
}

void WindowStateHandle::request_stage(const std::vector<std::size_t>& indices) {
  std::lock_guard lock(mu_);
  if (phase_ == Phase::Purged) return;
  std::vector<std::size_t> missing;
  for (auto i : indices) {
    if (!staged_.count(i) && !requested_.count(i)) missing.push_back(i);
  }
  if (!missing.empty()) submit_stage_locked(std::move(missing), false);
}

void WindowStateHandle::release_one(std::size_t index) {
  std::lock_guard lock(mu_);
  auto it = staged_.find(index);
  if (it == staged_.end()) return;
  staged_events_ -= it->second->size();
  staged_bytes_ -= it->second->byte_size();
  track(-static_cast<std::int64_t>(it->second->byte_size()));
  staged_.erase(it);
}

std::size_t WindowStateHandle::memory_events() const {
  std::lock_guard lock(mu_);
  return resident_events_ + staged_events_;
}

std::size_t WindowStateHandle::resident_events() const {
  std::lock_guard lock(mu_);
  return resident_events_;
}

std::size_t WindowStateHandle::staged_blocks() const {
  std::lock_guard lock(mu_);
  return staged_.size();
}

std::size_t WindowStateHandle::persistent_events() const {
  std::lock_guard lock(mu_);
  return p_events_ + transit_events_ + (late_buffer_ ? late_buffer_->size() : 0);
}

std::size_t WindowStateHandle::total_events() const {
  std::lock_guard lock(mu_);
  return resident_events_ + p_events_ + transit_events_ + (late_buffer_ ? late_buffer_->size() : 0);
}

std::size_t WindowStateHandle::in_transit_events() const {
  std::lock_guard lock(mu_);
  return transit_events_ + (late_buffer_ ? late_buffer_->size() : 0);
}

std::size_t WindowStateHandle::memory_bytes() const {
  std::lock_guard lock(mu_);
  return resident_bytes_ + transit_bytes_ + staged_bytes_ + (late_buffer_ ? late_buffer_->byte_size() : 0);
}

std::optional<StageStats> WindowStateHandle::take_stage_stats() {
  std::lock_guard lock(mu_);
  auto out = last_stage_;
  last_stage_.reset();
  return out;
}

}  // namespace latewin
