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
#include <stdexcept>
#include <string>

namespace latewin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by any mutating operation on a window whose state has been purged.
class PurgedWindow : public Error {
 public:
  explicit PurgedWindow(const std::string& window)
      : Error("window " + window + " has been purged") {}
};

class StorageRead : public Error {
 public:
  using Error::Error;
};

class StorageWrite : public Error {
 public:
  using Error::Error;
};

/// A block record failed to decode. `record()` is the zero-based index of the
/// offending record inside the block.
class CorruptBlock : public Error {
 public:
  CorruptBlock(std::size_t record, const std::string& what)
      : Error("corrupt block record " + std::to_string(record) + ": " + what),
        record_(record) {}

  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

class QueueClosed : public Error {
 public:
  QueueClosed() : Error("I/O request queue is closed") {}
};

class InfeasibleBound : public Error {
 public:
  using Error::Error;
};

class EmptyHistogram : public Error {
 public:
  EmptyHistogram() : Error("lateness histogram has no observations") {}
};

}  // namespace latewin
