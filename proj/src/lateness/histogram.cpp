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

#include "latewin/lateness/histogram.hpp"

#include <cmath>
#include <stdexcept>

#include "latewin/error.hpp"

namespace latewin {

LatenessHistogram::LatenessHistogram(TimeMs bin_width_ms) : bin_width_(bin_width_ms) {
  if (bin_width_ms <= 0) throw std::invalid_argument("bin width must be positive");
}

void LatenessHistogram::observe(TimeMs delay_ms) {
  if (delay_ms < 0) delay_ms = 0;
  ++counts_[delay_ms / bin_width_];
  ++n_;
  max_observed_ = std::max(max_observed_, delay_ms);
}

TimeMs LatenessHistogram::quantile(double p) const {
  if (n_ == 0) throw EmptyHistogram();
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside (0, 1]");
  const double target = p * static_cast<double>(n_);
  std::uint64_t cum = 0;
  for (const auto& [bin, count] : counts_) {
    cum += count;
    // Tolerate rounding in p * n so p = k/n hits bin k exactly.
    if (static_cast<double>(cum) >= target - 1e-9 * static_cast<double>(n_)) return (bin + 1) * bin_width_;
  }
  return (counts_.rbegin()->first + 1) * bin_width_;
}

void LatenessHistogram::write_csv(std::ostream& out) const {
  out << "bin_start_ms,count\n";
  for (const auto& [bin, count] : counts_) out << bin * bin_width_ << ',' << count << '\n';
}

double dkw_margin(std::uint64_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

CleanupBound cleanup_bound(const LatenessHistogram& hist, const CleanupConfig& config) {
  CleanupBound out;
  out.coverage = config.coverage;
  out.confidence = config.delta;
  out.basis_n = hist.n();
  if (hist.n() < config.n_min || hist.n() == 0) {
    out.bound_ms = config.initial_bound_ms;
    return out;
  }
  out.adaptive = true;
  const double level = config.coverage + dkw_margin(hist.n(), config.delta);
  out.bound_ms = level >= 1.0 ? hist.max_observed() : hist.quantile(level);
  return out;
}

}  // namespace latewin
