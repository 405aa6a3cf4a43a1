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

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace latewin::io {

/// Storage operation classes, highest priority first.
enum class RequestKind { Stage, LateWrite, Destage };

constexpr int priority(RequestKind kind) noexcept {
  switch (kind) {
    case RequestKind::Stage: return 2;
    case RequestKind::LateWrite: return 1;
    case RequestKind::Destage: return 0;
  }
  return 0;
}

/// Only destaging can be preempted, and only between blocks.
constexpr bool interruptible(RequestKind kind) noexcept { return kind == RequestKind::Destage; }

std::string_view to_string(RequestKind kind) noexcept;

/// The plan carried by a request. The worker calls step() once per block
/// until it returns true; preemption happens only between steps.
class IoTask {
 public:
  virtual ~IoTask() = default;

  /// Performs one block of work. Returns true when the plan is exhausted.
  virtual bool step() = 0;

  /// Called exactly once after the last step, after a failed step, or when
  /// the request is dropped because its ticket was cancelled.
  virtual void finish(std::exception_ptr /*error*/, bool /*cancelled*/) {}
};

struct IORequest {
  RequestKind kind = RequestKind::Destage;
  std::string window_id;
  std::unique_ptr<IoTask> task;
};

enum class TicketStatus { Pending, Running, Done, Failed, Cancelled };

namespace detail {
struct TicketState {
  std::mutex mutex;
  std::condition_variable cv;
  TicketStatus status = TicketStatus::Pending;
  bool cancel_requested = false;
  std::exception_ptr error;
};
}  // namespace detail

/// Completion handle for a submitted request. Copies share the same state.
class Ticket {
 public:
  Ticket() = default;
  explicit Ticket(std::shared_ptr<detail::TicketState> state) : state_(std::move(state)) {}

  bool valid() const noexcept { return state_ != nullptr; }
  TicketStatus status() const;
  bool finished() const;

  /// Blocks until the request finished, failed or was cancelled.
  TicketStatus wait() const;

  /// Storage error attached by the worker, if any.
  std::exception_ptr error() const;

  /// Requests cancellation. A pending request is dropped; a running one stops
  /// at its next block boundary.
  void cancel() const;

 private:
  std::shared_ptr<detail::TicketState> state_;
};

}  // namespace latewin::io
