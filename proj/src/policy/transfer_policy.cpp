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

#include "latewin/policy/transfer_policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace latewin {

PolicyKind policy_by_name(std::string_view name) {
  if (name == "standard") return PolicyKind::Standard;
  if (name == "local") return PolicyKind::Local;
  if (name == "global") return PolicyKind::Global;
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::Standard: return "standard";
    case PolicyKind::Local: return "local";
    case PolicyKind::Global: return "global";
  }
  return "?";
}

SelectionRule selection_rule_by_name(std::string_view name) {
  if (name == "size_desc") return SelectionRule::BySizeDesc;
  if (name == "ingestion_asc") return SelectionRule::ByIngestionAsc;
  throw std::invalid_argument("unknown selection rule: " + std::string(name));
}

void PolicyConfig::validate() const {
  if (!(rho_min >= 0 && rho_min <= 1)) throw std::invalid_argument("rho_min must be in [0, 1]");
  if (tau_ms < 0) throw std::invalid_argument("tau_ms must be positive (0 disables)");
  if (!(mu_critical >= 0 && mu_critical <= mu_moderate && mu_moderate <= 1))
    throw std::invalid_argument("need 0 <= mu_critical <= mu_moderate <= 1");
}

void PrestageEstimator::update(std::uint64_t staged_events, double elapsed_ms) {
  if (staged_events == 0) return;
  total_events_ += staged_events;
  total_ms_ += std::max(0.0, elapsed_ms);
}

double PrestageEstimator::basis_ms_per_event() const noexcept {
  return total_events_ == 0 ? 0.0 : total_ms_ / static_cast<double>(total_events_);
}

LateEventAction on_late_event(WatermarkKind watermark_kind, bool reexecution_queued) noexcept {
  if (reexecution_queued) return {};
  return {true, watermark_kind == WatermarkKind::Punctuated};
}

TimeMs plan_prestage(TimeMs now_ms, TimeMs predicted_reexec_ms, double lead_ms,
                     std::optional<TimeMs> preceding_expiry_ms) {
  TimeMs at = std::max(now_ms, predicted_reexec_ms - static_cast<TimeMs>(lead_ms + 0.5));
  // The first re-execution may start earlier, never later: waiting past the
  // lead for the predecessor to expire would just stall the firing.
  if (preceding_expiry_ms) at = std::min(at, *preceding_expiry_ms);
  return std::min(at, predicted_reexec_ms);
}

bool timer_elapsed(const PolicyConfig& config, TimeMs last_activity_ms, TimeMs now_ms) noexcept {
  return config.kind != PolicyKind::Standard && config.tau_ms > 0 && now_ms - last_activity_ms >= config.tau_ms;
}

PressureLevel pressure_level(const PolicyConfig& config, std::int64_t used_bytes, std::int64_t budget_bytes) noexcept {
  if (config.kind != PolicyKind::Global || budget_bytes <= 0) return PressureLevel::None;
  const double available = 1.0 - static_cast<double>(used_bytes) / static_cast<double>(budget_bytes);
  if (available < config.mu_critical) return PressureLevel::Critical;
  if (available < config.mu_moderate) return PressureLevel::Moderate;
  return PressureLevel::None;
}

std::vector<DestageAction> on_memory_pressure(PressureLevel level, std::vector<WindowLoad> windows,
                                              const PolicyConfig& config, std::int64_t used_bytes,
                                              std::int64_t budget_bytes) {
  std::vector<DestageAction> out;
  if (level == PressureLevel::None) return out;
  const double keep = config.rho_min;
  if (level == PressureLevel::Critical) {
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    for (const auto& w : windows) out.push_back({w.index, keep});
    return out;
  }
  if (config.selection_rule == SelectionRule::BySizeDesc) {
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) {
      return a.memory_bytes != b.memory_bytes ? a.memory_bytes > b.memory_bytes : a.index < b.index;
    });
  } else {
    std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) {
      return a.ingestion_rate != b.ingestion_rate ? a.ingestion_rate < b.ingestion_rate : a.index < b.index;
    });
  }
  const double target_used = (1.0 - config.mu_moderate) * static_cast<double>(budget_bytes);
  double need = static_cast<double>(used_bytes) - target_used;
  for (const auto& w : windows) {
    if (need <= 0) break;
    if (w.memory_bytes <= 0) continue;
    out.push_back({w.index, keep});
    need -= static_cast<double>(w.memory_bytes) * (1.0 - keep);
  }
  return out;
}

}  // namespace latewin
