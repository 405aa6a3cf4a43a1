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

#include "latewin/engine/config.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>
#include <thread>

namespace latewin {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value) {
  throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
}

template <typename T>
T number(std::string_view key, std::string_view value) {
  T out{};
  std::string digits;
  for (char c : value)
    if (c != '_') digits.push_back(c);  // TOML allows 1_000
  const auto* first = digits.data();
  const auto* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad(key, value);
  return out;
}

bool boolean(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad(key, value);
}

TriggerMode trigger_mode_by_name(std::string_view key, std::string_view v) {
  if (v == "standard") return TriggerMode::Standard;
  if (v == "staleness") return TriggerMode::Staleness;
  bad(key, v);
}

}  // namespace

Backend backend_by_name(std::string_view name) {
  if (name == "aion") return Backend::Aion;
  if (name == "memory") return Backend::Memory;
  throw std::invalid_argument("unknown backend: " + std::string(name));
}

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::Aion ? "aion" : "memory";
}

std::size_t EngineConfig::resolved_workers() const noexcept {
  if (serialization_workers > 0) return serialization_workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

void EngineConfig::validate() const {
  policy.validate();
  if (block_capacity == 0) throw std::invalid_argument("block_capacity must be positive");
  if (mbucket_capacity == 0) throw std::invalid_argument("mbucket_capacity must be positive");
  if (!(trigger.bound > 0 && trigger.bound <= 1)) throw std::invalid_argument("trigger.bound must be in (0, 1]");
  if (trigger.grid_bins < 10) throw std::invalid_argument("trigger.grid_bins must be at least 10");
  if (lateness.static_ms < 0) throw std::invalid_argument("lateness.static_ms must be >= 0");
  if (!(lateness.cleanup.coverage > 0 && lateness.cleanup.coverage <= 1))
    throw std::invalid_argument("lateness.coverage must be in (0, 1]");
  if (!(lateness.cleanup.delta > 0 && lateness.cleanup.delta < 1))
    throw std::invalid_argument("lateness.delta must be in (0, 1)");
  if (late_write_batch_ms < 0 || watermark_period_ms < 0 || memory_budget_bytes < 0)
    throw std::invalid_argument("durations and budgets must be >= 0");
  if (!(lead_scale >= 0)) throw std::invalid_argument("lead_scale must be >= 0");
}

void EngineConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view v = unquote(trim(raw));
  if (key == "backend") backend = backend_by_name(v);
  else if (key == "state_root") state_root = std::string(v);
  else if (key == "mbucket_capacity") mbucket_capacity = number<std::size_t>(key, v);
  else if (key == "block_capacity") block_capacity = number<std::size_t>(key, v);
  else if (key == "serialization_workers") serialization_workers = number<std::size_t>(key, v);
  else if (key == "codec_cost_ns") codec_cost_per_event = std::chrono::nanoseconds(number<std::int64_t>(key, v));
  else if (key == "io_latency_us") io_latency_per_block = std::chrono::microseconds(number<std::int64_t>(key, v));
  else if (key == "prestage") prestage = boolean(key, v);
  else if (key == "prestage_depth") prestage_depth = number<std::size_t>(key, v);
  else if (key == "late_write_batch_ms") late_write_batch_ms = number<TimeMs>(key, v);
  else if (key == "watermark_period_ms") watermark_period_ms = number<TimeMs>(key, v);
  else if (key == "memory_budget_bytes") memory_budget_bytes = number<std::int64_t>(key, v);
  else if (key == "lead_scale") lead_scale = number<double>(key, v);
  else if (key == "policy" || key == "policy.kind") policy.kind = policy_by_name(v);
  else if (key == "policy.rho_min") policy.rho_min = number<double>(key, v);
  else if (key == "policy.tau_ms") policy.tau_ms = number<TimeMs>(key, v);
  else if (key == "policy.mu_moderate") policy.mu_moderate = number<double>(key, v);
  else if (key == "policy.mu_critical") policy.mu_critical = number<double>(key, v);
  else if (key == "policy.selection_rule") policy.selection_rule = selection_rule_by_name(v);
  else if (key == "trigger" || key == "trigger.mode") trigger.mode = trigger_mode_by_name(key, v);
  else if (key == "trigger.bound") trigger.bound = number<double>(key, v);
  else if (key == "trigger.grid_bins") trigger.grid_bins = number<std::size_t>(key, v);
  else if (key == "trigger.model") trigger.model = std::string(v);
  else if (key == "lateness.static_ms") lateness.static_ms = number<TimeMs>(key, v);
  else if (key == "lateness.coverage") lateness.cleanup.coverage = number<double>(key, v);
  else if (key == "lateness.delta") lateness.cleanup.delta = number<double>(key, v);
  else if (key == "lateness.n_min") lateness.cleanup.n_min = number<std::uint64_t>(key, v);
  else if (key == "lateness.initial_bound_ms") lateness.cleanup.initial_bound_ms = number<TimeMs>(key, v);
  else throw std::invalid_argument("unknown config key: " + std::string(key));
}

EngineConfig EngineConfig::parse(std::istream& in) {
  EngineConfig cfg;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s = s.substr(0, i);
        break;
      }
    }
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw std::invalid_argument("line " + std::to_string(lineno) + ": bad section");
      section = std::string(trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(s.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

}  // namespace latewin
