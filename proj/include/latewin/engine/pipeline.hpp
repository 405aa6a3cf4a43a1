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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latewin/core/event.hpp"
#include "latewin/core/window.hpp"
#include "latewin/state/window_state.hpp"

namespace latewin {

enum class OperatorMode {
  /// Reads the whole window before producing output; fed only fully staged
  /// windows.
  Blocking,
  /// Consumes events incrementally; staging may proceed underneath.
  NonBlocking,
};

struct FiringContext {
  const WindowInstance& window;
  std::uint32_t firing_seq = 0;
  bool is_refinement = false;
};

/// One event sent downstream. The engine stamps it with the window end - 1
/// and tags it with the originating firing.
struct Emission {
  std::string key;
  Bytes payload;
};

struct UdfResult {
  /// The window's result, compared bitwise across backends.
  std::string value;
  std::vector<Emission> emit;
};

/// Must not depend on the order in which the cursor yields events.
using WindowUdf = std::function<UdfResult(const FiringContext&, EventCursor&)>;

struct OperatorSpec {
  std::string name;
  WindowSpec window;
  OperatorMode mode = OperatorMode::Blocking;
  WindowUdf udf;
  /// Source names or names of operators added earlier.
  std::vector<std::string> inputs;
  /// One window instance per event key when true; a single instance per
  /// time range otherwise.
  bool keyed = false;
};

/// Operators in topological order. An operator may only consume sources and
/// operators added before it, which keeps the graph acyclic and every
/// operator reachable from a source.
class Pipeline {
 public:
  void add_source(std::string name);

  /// Returns the operator index. Throws std::invalid_argument on duplicate
  /// names, unknown inputs, a missing UDF or an invalid window spec.
  std::size_t add_operator(OperatorSpec spec);

  const std::vector<std::string>& sources() const noexcept { return sources_; }
  const std::vector<OperatorSpec>& operators() const noexcept { return operators_; }

  /// Index of the operator, or nullopt.
  std::optional<std::size_t> find_operator(std::string_view name) const;
  bool has_source(std::string_view name) const;

 private:
  std::vector<std::string> sources_;
  std::vector<OperatorSpec> operators_;
};

/// Decoded downstream event.
struct EmittedEvent {
  std::uint16_t origin = 0;  // operator index
  TimeMs origin_start = 0;
  TimeMs origin_end = 0;
  std::uint32_t firing_seq = 0;
  std::string key;
  Bytes body;
};

Bytes tag_emission(std::uint16_t origin, const WindowInstance& window, std::uint32_t firing_seq,
                   std::span<const std::uint8_t> body);

/// Throws std::invalid_argument when the payload carries no tag.
EmittedEvent decode_emission(const Event& event);

/// The engine sends one empty emission (no key, no body) ahead of every
/// firing's output, so a refinement that emits nothing still supersedes.
inline bool is_firing_marker(const EmittedEvent& e) noexcept { return e.key.empty() && e.body.empty(); }

/// Drains the cursor and keeps, for every upstream window, only the events
/// of its latest firing, so refinements replace what they refine. Sorted by
/// (origin, origin window, key, body) for determinism.
std::vector<EmittedEvent> latest_emissions(EventCursor& cursor);

}  // namespace latewin
