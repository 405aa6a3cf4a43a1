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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "latewin/io/request.hpp"

namespace latewin::io {

/// Pending requests ordered by (priority desc, enqueue_seq asc).
class RequestQueue {
 public:
  struct Entry {
    IORequest request;
    std::uint64_t enqueue_seq = 0;
    std::shared_ptr<detail::TicketState> ticket;
    std::size_t steps_done = 0;
  };

  void push(Entry entry);
  std::optional<Entry> pop();
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

  /// Priority of the best pending request, or -1 when empty.
  int top_priority() const noexcept;

 private:
  static bool worse(const Entry& a, const Entry& b) noexcept;
  std::vector<Entry> heap_;
};

/// Observer hook for tests and metrics; called on the worker thread before
/// each step with the request's kind, sequence number and step index.
using StepObserver = std::function<void(RequestKind, std::uint64_t seq, std::size_t step)>;

/// Single storage worker draining a RequestQueue. A running Destage yields to
/// any higher-priority arrival at its next block boundary and resumes later
/// from where it stopped.
class IoScheduler {
 public:
  struct Options {
    /// When false no thread is started and the owner drives run_one_step().
    bool start_worker = true;
  };

  IoScheduler();
  explicit IoScheduler(Options options);
  ~IoScheduler();

  IoScheduler(const IoScheduler&) = delete;
  IoScheduler& operator=(const IoScheduler&) = delete;

  /// Throws QueueClosed after shutdown().
  Ticket submit(IORequest request);

  /// Executes one step of the best request. Returns false when idle.
  bool run_one_step();

  /// Stops accepting requests, lets the worker drain the queue, joins it.
  void shutdown();

  /// Requests queued or running.
  std::size_t outstanding() const;

  /// Blocks until the queue is empty and nothing is running.
  void drain();

  void set_observer(StepObserver observer);

  std::uint64_t steps_executed() const noexcept { return steps_.load(); }

 private:
  void worker_loop();
  std::optional<RequestQueue::Entry> next_locked();

  mutable std::mutex mutex_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  RequestQueue queue_;
  std::optional<RequestQueue::Entry> current_;
  bool running_step_ = false;
  bool closed_ = false;
  std::uint64_t next_seq_ = 0;
  std::atomic<std::uint64_t> steps_{0};
  StepObserver observer_;
  std::thread worker_;
};

}  // namespace latewin::io
