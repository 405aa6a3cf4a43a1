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

#include "latewin/io/scheduler.hpp"

#include <algorithm>

#include "latewin/error.hpp"

namespace latewin::io {

std::string_view to_string(RequestKind kind) noexcept {
  switch (kind) {
    case RequestKind::Stage: return "stage";
    case RequestKind::LateWrite: return "late_write";
    case RequestKind::Destage: return "destage";
  }
  return "?";
}

TicketStatus Ticket::status() const {
  std::lock_guard lock(state_->mutex);
  return state_->status;
}

bool Ticket::finished() const {
  auto s = status();
  return s == TicketStatus::Done || s == TicketStatus::Failed || s == TicketStatus::Cancelled;
}

TicketStatus Ticket::wait() const {
  std::unique_lock lock(state_->mutex);
  state_->cv.wait(lock, [&] {
    return state_->status == TicketStatus::Done || state_->status == TicketStatus::Failed ||
           state_->status == TicketStatus::Cancelled;
  });
  return state_->status;
}

std::exception_ptr Ticket::error() const {
  std::lock_guard lock(state_->mutex);
  return state_->error;
}

void Ticket::cancel() const {
  std::lock_guard lock(state_->mutex);
  state_->cancel_requested = true;
}

namespace {

void settle(detail::TicketState& t, TicketStatus status, std::exception_ptr error = nullptr) {
  {
    std::lock_guard lock(t.mutex);
    t.status = status;
    t.error = std::move(error);
  }
  t.cv.notify_all();
}

bool cancel_requested(detail::TicketState& t) {
  std::lock_guard lock(t.mutex);
  return t.cancel_requested;
}

}  // namespace

bool RequestQueue::worse(const Entry& a, const Entry& b) noexcept {
  const int pa = priority(a.request.kind), pb = priority(b.request.kind);
  if (pa != pb) return pa < pb;
  return a.enqueue_seq > b.enqueue_seq;
}

void RequestQueue::push(Entry entry) {
  heap_.push_back(std::move(entry));
  std::push_heap(heap_.begin(), heap_.end(), worse);
}

std::optional<RequestQueue::Entry> RequestQueue::pop() {
  if (heap_.empty()) return std::nullopt;
  std::pop_heap(heap_.begin(), heap_.end(), worse);
  Entry e = std::move(heap_.back());
  heap_.pop_back();
  return e;
}

int RequestQueue::top_priority() const noexcept {
  return heap_.empty() ? -1 : priority(heap_.front().request.kind);
}

IoScheduler::IoScheduler() : IoScheduler(Options{}) {}

IoScheduler::IoScheduler(Options options) {
  if (options.start_worker) worker_ = std::thread([this] { worker_loop(); });
}

IoScheduler::~IoScheduler() { shutdown(); }

Ticket IoScheduler::submit(IORequest request) {
  auto state = std::make_shared<detail::TicketState>();
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw QueueClosed();
    queue_.push(RequestQueue::Entry{std::move(request), next_seq_++, state});
  }
  work_cv_.notify_one();
  return Ticket(state);
}

std::optional<RequestQueue::Entry> IoScheduler::next_locked() {
  // Caller holds mutex_. Cancelled entries are returned through `current_`
  // being cleared; their finish() runs in run_one_step.
  if (current_ && interruptible(current_->request.kind) &&
      queue_.top_priority() > priority(current_->request.kind)) {
    queue_.push(std::move(*current_));
    current_.reset();
  }
  if (!current_) {
    auto e = queue_.pop();
    if (!e) return std::nullopt;
    current_ = std::move(e);
  }
  auto out = std::move(current_);
  current_.reset();
  return out;
}

bool IoScheduler::run_one_step() {
  RequestQueue::Entry entry;
  {
    std::lock_guard lock(mutex_);
    auto next = next_locked();
    if (!next) return false;
    entry = std::move(*next);
    running_step_ = true;
  }

  auto& ticket = *entry.ticket;
  if (cancel_requested(ticket)) {
    entry.request.task->finish(nullptr, true);
    settle(ticket, TicketStatus::Cancelled);
  } else {
    {
      std::lock_guard lock(ticket.mutex);
      ticket.status = TicketStatus::Running;
    }
    StepObserver observer;
    {
      std::lock_guard lock(mutex_);
      observer = observer_;
    }
    if (observer) observer(entry.request.kind, entry.enqueue_seq, entry.steps_done);

    bool done = false;
    std::exception_ptr error;
    try {
      done = entry.request.task->step();
    } catch (...) {
      error = std::current_exception();
      done = true;
    }
    ++entry.steps_done;
    steps_.fetch_add(1);
    if (done) {
      entry.request.task->finish(error, false);
      settle(ticket, error ? TicketStatus::Failed : TicketStatus::Done, error);
    } else {
      std::lock_guard lock(mutex_);
      current_ = std::move(entry);
      running_step_ = false;
      return true;
    }
  }

  {
    std::lock_guard lock(mutex_);
    running_step_ = false;
  }
  idle_cv_.notify_all();
  return true;
}

void IoScheduler::worker_loop() {
  while (true) {
    {
      std::unique_lock lock(mutex_);
      work_cv_.wait(lock, [&] { return closed_ || !queue_.empty() || current_; });
      if (closed_ && queue_.empty() && !current_) break;
    }
    run_one_step();
    std::lock_guard lock(mutex_);
    if (queue_.empty() && !current_) idle_cv_.notify_all();
  }
  idle_cv_.notify_all();
}

void IoScheduler::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (closed_ && !worker_.joinable()) return;
    closed_ = true;
  }
  work_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::size_t IoScheduler::outstanding() const {
  std::lock_guard lock(mutex_);
  return queue_.size() + (current_ ? 1 : 0) + (running_step_ ? 1 : 0);
}

void IoScheduler::drain() {
  std::unique_lock lock(mutex_);
  if (!worker_.joinable()) {
    lock.unlock();
    while (run_one_step()) {
    }
    return;
  }
  idle_cv_.wait(lock, [&] { return queue_.empty() && !current_ && !running_step_; });
}

void IoScheduler::set_observer(StepObserver observer) {
  std::lock_guard lock(mutex_);
  observer_ = std::move(observer);
}

}  // namespace latewin::io
