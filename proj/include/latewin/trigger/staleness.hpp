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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latewin/lateness/histogram.hpp"

namespace latewin {

/// Expected arrival pattern of late events over [0, T]. The distribution is
/// truncated to the support and renormalised, so cdf(0) = 0 and cdf(T) = 1.
class ArrivalModel {
 public:
  enum class Kind { LogNormal, Uniform, Normal, Bursts, Empirical };

  /// LogNormal(mu, sigma) in window-index units, with [0, T] spanning
  /// `support_units` indices.
  static ArrivalModel lognormal(double mu = 0.0, double sigma = 1.0, double support_units = 20.0);
  static ArrivalModel uniform();
  /// Mean and sd as fractions of T.
  static ArrivalModel normal(double mean = 0.5, double sd = 0.15);
  /// Equal mixture of normals at 0.2T, 0.5T and 0.8T with sd 0.05T.
  static ArrivalModel bursts();
  /// Piecewise-linear cumulative histogram over [0, T_ms].
  static ArrivalModel empirical(const LatenessHistogram& hist, double T_ms);

  /// `lnorm`, `unif`, `norm` or `bursts`; throws std::invalid_argument.
  static ArrivalModel by_name(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;

  /// Mass in [0, u*T] for u in [0, 1].
  double cdf(double u) const;

  /// Smallest u with cdf(u) >= p, by bisection.
  double quantile(double p) const;

 private:
  double raw_cdf(double u) const;

  Kind kind_ = Kind::Uniform;
  double a_ = 0, b_ = 1, c_ = 1;
  double lo_ = 0, hi_ = 1;  // raw cdf at the support ends
  std::shared_ptr<const std::vector<std::pair<double, double>>> points_;  // (u, cum mass)
};

struct StalenessParams {
  double T_ms = 1.0;
  double N = 1.0;
  double bound = 0.1;
};

struct ExecutionSchedule {
  /// Offsets from the window end, strictly increasing, last one == T.
  std::vector<double> times_ms;
  /// Expected staleness of each interval (e_{i-1}, e_i].
  std::vector<double> staleness;

  std::size_t size() const noexcept { return times_ms.size(); }
};

/// t * n / (T * N).
double staleness(double t_ms, double n, const StalenessParams& params);

/// Fills `staleness` from the model's expected interval masses.
void evaluate(ExecutionSchedule& schedule, const ArrivalModel& model, const StalenessParams& params);

ExecutionSchedule make_schedule(std::vector<double> times_ms, const ArrivalModel& model,
                                const StalenessParams& params);

double max_staleness(const ExecutionSchedule& schedule, const ArrivalModel& model, const StalenessParams& params);

/// Scans `grid_bins` instants and places an execution at the last instant
/// before the accumulated staleness would exceed the bound. Ends with T.
/// Throws InfeasibleBound when one grid step alone breaks the bound.
ExecutionSchedule greedy_place(const ArrivalModel& model, const StalenessParams& params,
                               std::size_t grid_bins = 1'000);

struct BalanceStats {
  std::size_t iterations = 0;
  bool converged = false;
  double stddev = 0;
};

/// Relaxes interior times towards equal neighbouring staleness (damped local
/// equalisation) until the staleness stddev drops below eps_std. Returns the
/// iterate with the smallest maximum staleness.
ExecutionSchedule balance(const ExecutionSchedule& schedule, const ArrivalModel& model,
                          const StalenessParams& params, std::size_t max_iters = 10'000,
                          double eps_std = 1e-6, BalanceStats* stats = nullptr);

/// k executions at the model's i/k mass quantiles, then balanced.
ExecutionSchedule balanced_schedule(std::size_t k, const ArrivalModel& model, const StalenessParams& params,
                                    BalanceStats* stats = nullptr);

/// balance(greedy_place(...)).
ExecutionSchedule plan_executions(const ArrivalModel& model, const StalenessParams& params,
                                  std::size_t grid_bins = 1'000);

/// Times i*T/k.
ExecutionSchedule baseline_deltat(std::size_t k, const ArrivalModel& model, const StalenessParams& params);

/// Times at the i/k mass quantiles.
ExecutionSchedule baseline_deltaev(std::size_t k, const ArrivalModel& model, const StalenessParams& params);

enum class TriggerKind { Aion, DeltaT, DeltaEv };

std::string_view to_string(TriggerKind kind) noexcept;
/// `aion`, `deltat` or `deltaev`; throws std::invalid_argument.
TriggerKind trigger_by_name(std::string_view name);

/// k executions of the given trigger. Aion is the balanced schedule.
ExecutionSchedule trigger_schedule(TriggerKind kind, std::size_t k, const ArrivalModel& model,
                                   const StalenessParams& params);

/// Staleness comparisons allow 1e-12 of rounding.
constexpr bool within_bound(double st, double bound) noexcept { return st <= bound + 1e-12; }

/// Executions the trigger needs to keep max staleness within params.bound:
/// the planned schedule size for Aion, the smallest k <= max_k for the
/// baselines. Empty when the baseline never gets there.
std::optional<std::size_t> executions_to_bound(TriggerKind kind, const ArrivalModel& model,
                                               const StalenessParams& params, std::size_t max_k = 30,
                                               std::size_t grid_bins = 1'000);

}  // namespace latewin
