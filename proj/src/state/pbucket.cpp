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

#include "latewin/state/pbucket.hpp"

#include <fstream>
#include <sstream>

#include "latewin/error.hpp"

namespace latewin {

namespace fs = std::filesystem;

PBucket::PBucket(fs::path base)
    : events_path_(fs::path(base).concat(".events")), index_path_(base.concat(".index")) {}

PBucket PBucket::open(fs::path base) {
  PBucket bucket(std::move(base));
  std::ifstream in(bucket.index_path_);
  if (!in) throw StorageRead("cannot open index " + bucket.index_path_.string());
  BlockIndexEntry e;
  while (in >> e.offset >> e.length >> e.count) {
    if (e.offset != bucket.end_offset_) throw StorageRead("non-contiguous index " + bucket.index_path_.string());
    bucket.index_.push_back(e);
    bucket.end_offset_ = e.offset + e.length;
    bucket.total_events_ += e.count;
  }
  return bucket;
}

std::vector<BlockIndexEntry> PBucket::index() const {
  std::lock_guard lock(*mutex_);
  return index_;
}

std::size_t PBucket::block_count() const {
  std::lock_guard lock(*mutex_);
  return index_.size();
}

std::uint64_t PBucket::total_events() const {
  std::lock_guard lock(*mutex_);
  return total_events_;
}

BlockIndexEntry PBucket::append(std::string_view bytes, std::uint64_t event_count) {
  std::uint64_t offset;
  {
    std::lock_guard lock(*mutex_);
    offset = end_offset_;
  }
  if (events_path_.has_parent_path()) fs::create_directories(events_path_.parent_path());
  {
    std::ofstream out(events_path_, std::ios::binary | std::ios::app);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageWrite("cannot append to " + events_path_.string());
  }
  BlockIndexEntry entry{offset, bytes.size(), event_count};
  {
    std::ofstream idx(index_path_, std::ios::app);
    idx << entry.offset << ' ' << entry.length << ' ' << entry.count << '\n';
    if (!idx) throw StorageWrite("cannot append to " + index_path_.string());
  }
  std::lock_guard lock(*mutex_);
  index_.push_back(entry);
  end_offset_ = offset + bytes.size();
  total_events_ += event_count;
  return entry;
}

std::string PBucket::read(const BlockIndexEntry& entry) const {
  std::ifstream in(events_path_, std::ios::binary);
  if (!in) throw StorageRead("cannot open " + events_path_.string());
  in.seekg(static_cast<std::streamoff>(entry.offset));
  std::string out(entry.length, '\0');
  in.read(out.data(), static_cast<std::streamsize>(entry.length));
  if (static_cast<std::uint64_t>(in.gcount()) != entry.length)
    throw StorageRead("short read from " + events_path_.string());
  return out;
}

void PBucket::remove() {
  std::error_code ec;
  fs::remove(events_path_, ec);
  fs::remove(index_path_, ec);
  std::lock_guard lock(*mutex_);
  index_.clear();
  end_offset_ = 0;
  total_events_ = 0;
}

}  // namespace latewin
