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
#include <map>
#include <ostream>

#include "latewin/core/event.hpp"

namespace latewin {

/// Fixed-width histogram of late-arrival delays (processing time minus
/// window end). Quantiles are reported as bin upper edges, so they are at
/// most one bin above the exact sample quantile.
class LatenessHistogram {
 public:
  explicit LatenessHistogram(TimeMs bin_width_ms = 1'000);

  void observe(TimeMs delay_ms);

  /// Upper edge of the first bin whose cumulative count reaches p * n.
  /// Throws EmptyHistogram when n == 0, std::invalid_argument unless 0 < p <= 1.
  TimeMs quantile(double p) const;

  TimeMs bin_width() const noexcept { return bin_width_; }
  std::uint64_t n() const noexcept { return n_; }
  TimeMs max_observed() const noexcept { return max_observed_; }
  const std::map<std::int64_t, std::uint64_t>& counts() const noexcept { return counts_; }

  /// `bin_start_ms,count` rows with a header line.
  void write_csv(std::ostream& out) const;

 private:
  TimeMs bin_width_;
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t n_ = 0;
  TimeMs max_observed_ = 0;
};

struct CleanupBound {
  TimeMs bound_ms = 0;
  double coverage = 0.99;
  double confidence = 0.05;
  std::uint64_t basis_n = 0;
  /// False while the initial conservative bound is in force.
  bool adaptive = false;
};

struct CleanupConfig {
  double coverage = 0.99;
  double delta = 0.05;
  std::uint64_t n_min = 1'000;
  TimeMs initial_bound_ms = 0;
};

/// sqrt(ln(2/delta) / (2n)).
double dkw_margin(std::uint64_t n, double delta);

/// Bound covering `coverage` of delays with confidence 1 - delta, or the
/// configured initial bound until n_min observations exist.
CleanupBound cleanup_bound(const LatenessHistogram& hist, const CleanupConfig& config);

/// True iff now >= window_end + bound.
constexpr bool should_purge(TimeMs window_end, TimeMs now_ms, const CleanupBound& bound) noexcept {
  return now_ms >= window_end + bound.bound_ms;
}

}  // namespace latewin
