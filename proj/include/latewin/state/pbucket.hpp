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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace latewin {

struct BlockIndexEntry {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t count = 0;

  friend bool operator==(const BlockIndexEntry&, const BlockIndexEntry&) = default;
};

/// Append-only events file plus its sidecar index (`offset length count`
/// per line). Reads and writes are meant for the storage worker; the index
/// may be inspected from any thread.
class PBucket {
 public:
  /// `base` without extension; files are `<base>.events` and `<base>.index`.
  explicit PBucket(std::filesystem::path base);

  /// Reloads an existing bucket from its sidecar index.
  static PBucket open(std::filesystem::path base);

  const std::filesystem::path& file_path() const noexcept { return events_path_; }
  const std::filesystem::path& index_path() const noexcept { return index_path_; }

  std::vector<BlockIndexEntry> index() const;
  std::size_t block_count() const;
  std::uint64_t total_events() const;

  /// Appends one encoded block and records it in the index.
  BlockIndexEntry append(std::string_view bytes, std::uint64_t event_count);

  /// Throws StorageRead when the file is missing or shorter than the entry.
  std::string read(const BlockIndexEntry& entry) const;

  /// Deletes both files. The bucket is empty afterwards.
  void remove();

 private:
  std::filesystem::path events_path_;
  std::filesystem::path index_path_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  std::vector<BlockIndexEntry> index_;
  std::uint64_t end_offset_ = 0;
  std::uint64_t total_events_ = 0;
};

}  // namespace latewin
