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

#include "latewin/trigger/staleness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latewin/error.hpp"

namespace latewin {

namespace {

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double stddev(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

}  // namespace

ArrivalModel ArrivalModel::lognormal(double mu, double sigma, double support_units) {
  if (sigma <= 0 || support_units <= 0) throw std::invalid_argument("lognormal needs sigma > 0 and support > 0");
  ArrivalModel m;
  m.kind_ = Kind::LogNormal;
  m.a_ = mu;
  m.b_ = sigma;
  m.c_ = support_units;
  m.lo_ = 0;
  m.hi_ = m.raw_cdf(1.0);
  return m;
}

ArrivalModel ArrivalModel::uniform() {
  ArrivalModel m;
  m.kind_ = Kind::Uniform;
  m.lo_ = 0;
  m.hi_ = 1;
  return m;
}

ArrivalModel ArrivalModel::normal(double mean, double sd) {
  if (sd <= 0) throw std::invalid_argument("normal needs sd > 0");
  ArrivalModel m;
  m.kind_ = Kind::Normal;
  m.a_ = mean;
  m.b_ = sd;
  m.lo_ = m.raw_cdf(0.0);
  m.hi_ = m.raw_cdf(1.0);
  return m;
}

ArrivalModel ArrivalModel::bursts() {
  ArrivalModel m;
  m.kind_ = Kind::Bursts;
  m.b_ = 0.05;
  m.lo_ = m.raw_cdf(0.0);
  m.hi_ = m.raw_cdf(1.0);
  return m;
}

ArrivalModel ArrivalModel::empirical(const LatenessHistogram& hist, double T_ms) {
  if (hist.n() == 0) throw EmptyHistogram();
  if (T_ms <= 0) throw std::invalid_argument("support must be positive");
  auto pts = std::make_shared<std::vector<std::pair<double, double>>>();
  pts->emplace_back(0.0, 0.0);
  double cum = 0;
  const double w = static_cast<double>(hist.bin_width());
  for (const auto& [bin, count] : hist.counts()) {
    const double start = static_cast<double>(bin) * w / T_ms;
    if (start >= 1.0) break;
    if (start > pts->back().first) pts->emplace_back(start, cum);
    cum += static_cast<double>(count);
    pts->emplace_back((static_cast<double>(bin) + 1) * w / T_ms, cum);
  }
  ArrivalModel m;
  m.kind_ = Kind::Empirical;
  m.points_ = std::move(pts);
  m.lo_ = 0;
  m.hi_ = m.raw_cdf(1.0);
  if (m.hi_ <= 0) throw std::invalid_argument("no observed mass inside the support");
  return m;
}

ArrivalModel ArrivalModel::by_name(std::string_view name) {
  if (name == "lnorm") return lognormal();
  if (name == "unif") return uniform();
  if (name == "norm") return normal();
  if (name == "bursts") return bursts();
  throw std::invalid_argument("unknown distribution: " + std::string(name));
}

std::string ArrivalModel::name() const {
  switch (kind_) {
    case Kind::LogNormal: return "lnorm";
    case Kind::Uniform: return "unif";
    case Kind::Normal: return "norm";
    case Kind::Bursts: return "bursts";
    case Kind::Empirical: return "empirical";
  }
  return "?";
}

double ArrivalModel::raw_cdf(double u) const {
  switch (kind_) {
    case Kind::LogNormal:
      return u <= 0 ? 0.0 : phi((std::log(u * c_) - a_) / b_);
    case Kind::Uniform:
      return u;
    case Kind::Normal:
      return phi((u - a_) / b_);
    case Kind::Bursts:
      return (phi((u - 0.2) / b_) + phi((u - 0.5) / b_) + phi((u - 0.8) / b_)) / 3.0;
    case Kind::Empirical: {
      const auto& p = *points_;
      if (u >= p.back().first) return p.back().second;
      auto it = std::upper_bound(p.begin(), p.end(), u, [](double x, const auto& pt) { return x < pt.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double span = hi.first - lo.first;
      return span <= 0 ? hi.second : lo.second + (hi.second - lo.second) * (u - lo.first) / span;
    }
  }
  return 0;
}

double ArrivalModel::cdf(double u) const {
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  return std::clamp((raw_cdf(u) - lo_) / (hi_ - lo_), 0.0, 1.0);
}

double ArrivalModel::quantile(double p) const {
  if (p <= 0) return 0.0;
  if (p >= 1) return 1.0;
  double lo = 0, hi = 1;
  for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) >= p ? hi : lo) = mid;
  }
  return hi;
}

double staleness(double t_ms, double n, const StalenessParams& params) {
  return t_ms * n / (params.T_ms * params.N);
}

void evaluate(ExecutionSchedule& s, const ArrivalModel& model, const StalenessParams& params) {
  s.staleness.resize(s.times_ms.size());
  double prev_t = 0, prev_f = 0;
  for (std::size_t i = 0; i < s.times_ms.size(); ++i) {
    const double f = model.cdf(s.times_ms[i] / params.T_ms);
    s.staleness[i] = staleness(s.times_ms[i] - prev_t, (f - prev_f) * params.N, params);
    prev_t = s.times_ms[i];
    prev_f = f;
  }
}

ExecutionSchedule make_schedule(std::vector<double> times_ms, const ArrivalModel& model,
                                const StalenessParams& params) {
  ExecutionSchedule s;
  s.times_ms = std::move(times_ms);
  evaluate(s, model, params);
  return s;
}

double max_staleness(const ExecutionSchedule& schedule, const ArrivalModel& model, const StalenessParams& params) {
  ExecutionSchedule s = schedule;
  evaluate(s, model, params);
  return max_of(s.staleness);
}

ExecutionSchedule greedy_place(const ArrivalModel& model, const StalenessParams& params, std::size_t grid_bins) {
  if (grid_bins < 10) throw std::invalid_argument("grid_bins must be at least 10");
  const double G = static_cast<double>(grid_bins);
  std::vector<double> times;
  std::size_t prev = 0;  // grid index of the last execution
  double prev_f = 0;
  std::size_t j = 1;
  while (j <= grid_bins) {
    const double u = static_cast<double>(j) / G;
    const double st = (u - static_cast<double>(prev) / G) * (model.cdf(u) - prev_f);
    if (!within_bound(st, params.bound)) {
      if (j - 1 == prev) {
        throw InfeasibleBound("a single grid step exceeds staleness bound " + std::to_string(params.bound));
      }
      prev = j - 1;
      prev_f = model.cdf(static_cast<double>(prev) / G);
      times.push_back(static_cast<double>(prev) / G * params.T_ms);
      continue;  // re-test j against the new execution
    }
    ++j;
  }
  times.push_back(params.T_ms);
  return make_schedule(std::move(times), model, params);
}

ExecutionSchedule balance(const ExecutionSchedule& schedule, const ArrivalModel& model,
                          const StalenessParams& params, std::size_t max_iters, double eps_std,
                          BalanceStats* stats) {
  ExecutionSchedule cur = schedule;
  evaluate(cur, model, params);
  ExecutionSchedule best = cur;
  double best_max = max_of(best.staleness);
  BalanceStats st;
  st.stddev = stddev(cur.staleness);
  const std::size_t k = cur.times_ms.size();
  // Work on normalised time.
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = cur.times_ms[i] / params.T_ms;

  while (st.stddev >= eps_std && st.iterations < max_iters && k > 1) {
    ++st.iterations;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const double a = i == 0 ? 0.0 : x[i - 1];
      const double b = x[i + 1];
      const double fa = model.cdf(a), fx = model.cdf(x[i]), fb = model.cdf(b);
      const double rl = std::max(fx - fa, 0.0) / std::max(x[i] - a, 1e-300);
      const double rr = std::max(fb - fx, 0.0) / std::max(b - x[i], 1e-300);
      const double sl = std::sqrt(rl), sr = std::sqrt(rr);
      if (sl + sr <= 0) continue;
      // Under locally constant densities st_l = (x-a)^2 rl and st_r = (b-x)^2 rr
      // are equal at this point.
      const double target = (a * sl + b * sr) / (sl + sr);
      const double span = b - a;
      x[i] = std::clamp(x[i] + 0.5 * (target - x[i]), a + 1e-12 * span, b - 1e-12 * span);
    }
    for (std::size_t i = 0; i < k; ++i) cur.times_ms[i] = x[i] * params.T_ms;
    cur.times_ms.back() = params.T_ms;
    evaluate(cur, model, params);
    st.stddev = stddev(cur.staleness);
    const double m = max_of(cur.staleness);
    if (m < best_max) {
      best_max = m;
      best = cur;
    }
  }
  st.converged = st.stddev < eps_std;
  if (stats) *stats = st;
  return best;
}

ExecutionSchedule balanced_schedule(std::size_t k, const ArrivalModel& model, const StalenessParams& params,
                                    BalanceStats* stats) {
  return balance(baseline_deltaev(k, model, params), model, params, 10'000, 1e-6, stats);
}

ExecutionSchedule plan_executions(const ArrivalModel& model, const StalenessParams& params, std::size_t grid_bins) {
  return balance(greedy_place(model, params, grid_bins), model, params);
}

ExecutionSchedule baseline_deltat(std::size_t k, const ArrivalModel& model, const StalenessParams& params) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<double> t;
  for (std::size_t i = 1; i <= k; ++i) t.push_back(params.T_ms * static_cast<double>(i) / static_cast<double>(k));
  t.back() = params.T_ms;
  return make_schedule(std::move(t), model, params);
}

ExecutionSchedule baseline_deltaev(std::size_t k, const ArrivalModel& model, const StalenessParams& params) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<double> t;
  for (std::size_t i = 1; i < k; ++i) {
    t.push_back(params.T_ms * model.quantile(static_cast<double>(i) / static_cast<double>(k)));
  }
  t.push_back(params.T_ms);
  return make_schedule(std::move(t), model, params);
}

std::string_view to_string(TriggerKind kind) noexcept {
  switch (kind) {
    case TriggerKind::Aion: return "aion";
    case TriggerKind::DeltaT: return "deltat";
    case TriggerKind::DeltaEv: return "deltaev";
  }
  return "?";
}

TriggerKind trigger_by_name(std::string_view name) {
  if (name == "aion") return TriggerKind::Aion;
  if (name == "deltat") return TriggerKind::DeltaT;
  if (name == "deltaev") return TriggerKind::DeltaEv;
  throw std::invalid_argument("unknown trigger: " + std::string(name));
}

ExecutionSchedule trigger_schedule(TriggerKind kind, std::size_t k, const ArrivalModel& model,
                                   const StalenessParams& params) {
  switch (kind) {
    case TriggerKind::Aion: return balanced_schedule(k, model, params);
    case TriggerKind::DeltaT: return baseline_deltat(k, model, params);
    case TriggerKind::DeltaEv: return baseline_deltaev(k, model, params);
  }
  throw std::invalid_argument("bad trigger kind");
}

std::optional<std::size_t> executions_to_bound(TriggerKind kind, const ArrivalModel& model,
                                               const StalenessParams& params, std::size_t max_k,
                                               std::size_t grid_bins) {
  if (kind == TriggerKind::Aion) return plan_executions(model, params, grid_bins).size();
  for (std::size_t k = 1; k <= max_k; ++k) {
    if (within_bound(max_staleness(trigger_schedule(kind, k, model, params), model, params), params.bound)) return k;
  }
  return std::nullopt;
}

}  // namespace latewin
