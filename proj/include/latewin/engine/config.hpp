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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "latewin/core/event.hpp"
#include "latewin/lateness/histogram.hpp"
#include "latewin/policy/transfer_policy.hpp"
#include "latewin/state/block.hpp"

namespace latewin {

enum class Backend { Aion, Memory };

Backend backend_by_name(std::string_view name);
std::string_view to_string(Backend backend) noexcept;

enum class TriggerMode {
  /// One re-execution at the next watermark after a late event.
  Standard,
  /// Re-executions at the planned staleness-bounded offsets.
  Staleness,
};

struct TriggerConfig {
  TriggerMode mode = TriggerMode::Staleness;
  double bound = 0.1;
  std::size_t grid_bins = 1'000;
  /// Arrival model used until the histogram has enough samples: lnorm, unif,
  /// norm or bursts. Afterwards the observed histogram is used.
  std::string model = "lnorm";
};

struct LatenessConfig {
  /// Static allowed lateness when > 0; the predictive bound otherwise.
  TimeMs static_ms = 0;
  CleanupConfig cleanup;
};

struct EngineConfig {
  Backend backend = Backend::Aion;
  PolicyConfig policy;
  TriggerConfig trigger;
  LatenessConfig lateness;

  std::filesystem::path state_root = "latewin-state";
  std::size_t mbucket_capacity = 500'000;
  std::size_t block_capacity = kDefaultBlockCapacity;
  std::size_t serialization_workers = 0;  // 0 = hardware threads
  std::chrono::nanoseconds codec_cost_per_event{0};
  std::chrono::microseconds io_latency_per_block{0};

  bool prestage = true;
  /// Windows that may hold prestaged copies at once.
  std::size_t prestage_depth = 2;
  /// Age after which buffered late events are written out.
  TimeMs late_write_batch_ms = 50;
  /// Watermark period, used to predict the next re-execution. 0 = unknown.
  TimeMs watermark_period_ms = 0;
  /// Budget for tracked state bytes; memory pressure and the OOM flag use it.
  /// 0 = unlimited.
  std::int64_t memory_budget_bytes = 0;
  /// Processing-time ms per wall ms; converts measured staging time into
  /// prestage lead.
  double lead_scale = 1.0;

  std::size_t resolved_workers() const noexcept;

  /// Throws std::invalid_argument.
  void validate() const;

  /// Applies one `key = value` setting; dotted keys address sections
  /// (`policy.rho_min`). Throws std::invalid_argument for unknown keys.
  void set(std::string_view key, std::string_view value);

  /// TOML-style document: `[section]` headers, `key = value` lines, `#`
  /// comments, optionally quoted strings.
  static EngineConfig parse(std::istream& in);
};

}  // namespace latewin
