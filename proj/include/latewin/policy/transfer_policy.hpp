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
#include <optional>
#include <string_view>
#include <vector>

#include "latewin/core/event.hpp"
#include "latewin/core/watermark.hpp"

namespace latewin {

enum class PolicyKind { Standard, Local, Global };
enum class SelectionRule { BySizeDesc, ByIngestionAsc };
enum class PressureLevel { None, Moderate, Critical };

PolicyKind policy_by_name(std::string_view name);
std::string_view to_string(PolicyKind kind) noexcept;
SelectionRule selection_rule_by_name(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Standard;
  /// Bootstrap fraction kept in memory on destage (local and global).
  double rho_min = 0.0;
  /// Idle time before a window is destaged; 0 disables the timer.
  TimeMs tau_ms = 0;
  /// Available-memory fractions that trigger moderate and critical pressure.
  double mu_moderate = 0.25;
  double mu_critical = 0.10;
  SelectionRule selection_rule = SelectionRule::BySizeDesc;

  /// Throws std::invalid_argument.
  void validate() const;

  /// Fraction kept when a window is destaged.
  double keep_fraction() const noexcept { return kind == PolicyKind::Standard ? 0.0 : rho_min; }
};

/// Event-weighted staging cost. The basis is total elapsed time over total
/// staged events, so splitting one observation in two changes nothing.
class PrestageEstimator {
 public:
  void update(std::uint64_t staged_events, double elapsed_ms);

  double basis_ms_per_event() const noexcept;
  std::uint64_t total_staged_events() const noexcept { return total_events_; }

  /// Expected staging time for `persistent_events` events.
  double lead_ms(std::uint64_t persistent_events) const noexcept {
    return basis_ms_per_event() * static_cast<double>(persistent_events);
  }

 private:
  std::uint64_t total_events_ = 0;
  double total_ms_ = 0;
};

struct LateEventAction {
  bool schedule_reexecution = false;
  bool prestage_now = false;
};

/// First late event of a window queues a re-execution; punctuated
/// watermarks also prestage right away.
LateEventAction on_late_event(WatermarkKind watermark_kind, bool reexecution_queued) noexcept;

/// max(now, predicted - lead). For a window's first re-execution the
/// stage starts when the preceding window fully expires, if that comes before
/// the lead-based time. Never later than predicted_reexec_ms.
TimeMs plan_prestage(TimeMs now_ms, TimeMs predicted_reexec_ms, double lead_ms,
                     std::optional<TimeMs> preceding_expiry_ms = std::nullopt);

/// True when the window saw neither events nor a watermark for tau.
bool timer_elapsed(const PolicyConfig& config, TimeMs last_activity_ms, TimeMs now_ms) noexcept;

/// Pressure from available = 1 - used / budget.
PressureLevel pressure_level(const PolicyConfig& config, std::int64_t used_bytes, std::int64_t budget_bytes) noexcept;

struct WindowLoad {
  std::size_t index = 0;  // caller's handle index
  std::int64_t memory_bytes = 0;
  double ingestion_rate = 0;
};

struct DestageAction {
  std::size_t index = 0;
  double keep_fraction = 0;
};

/// Moderate: destage windows in selection order until the expected savings
/// bring available memory back to mu_moderate. Critical: every window down
/// to its rho_min set. Ties break on index so the result is deterministic.
std::vector<DestageAction> on_memory_pressure(PressureLevel level, std::vector<WindowLoad> windows,
                                              const PolicyConfig& config, std::int64_t used_bytes,
                                              std::int64_t budget_bytes);

}  // namespace latewin
