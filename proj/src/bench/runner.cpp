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

#include "latewin/bench/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "latewin/core/watermark.hpp"

namespace latewin::bench {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

template <typename T>
double median(std::vector<T> v) {
  if (v.empty()) return 0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = static_cast<double>(v[mid]);
  if (v.size() % 2 == 0) {
    const auto lo = *std::max_element(v.begin(), v.begin() + mid);
    m = (m + static_cast<double>(lo)) / 2;
  }
  return m;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

struct PeriodAcc {
  std::uint64_t on_time = 0, all = 0;
  std::uint64_t initial_events = 0, all_events = 0;
  double initial_s = 0, all_s = 0;
  double max_staleness = 0;
  std::uint64_t purged = 0, purged_reexecs = 0;
  std::vector<std::int64_t> samples;
  Clock::time_point wall_start;
};

double rate(double events, double seconds) { return seconds > 0 ? events / seconds : 0; }

}  // namespace

void write_metrics_csv(const fs::path& path, const std::vector<WatermarkMetrics>& series) {
  auto out = open_csv(path);
  out << "watermark,tracked_state_bytes,tracked_state_peak_bytes,ingestion_rate_normal,ingestion_rate_all,"
         "processing_rate_normal,processing_rate_all,max_staleness_observed,executions_per_window,"
         "dropped_beyond_bound,destage_backlog_bytes,live_windows,oom\n";
  for (const auto& m : series) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.1f,%.1f,%.1f,%.1f,%.6f,%.3f,%llu,%lld,%zu,%d\n", m.watermark,
                  static_cast<long long>(m.tracked_state_bytes), static_cast<long long>(m.tracked_state_peak_bytes),
                  m.ingestion_rate_normal, m.ingestion_rate_all, m.processing_rate_normal, m.processing_rate_all,
                  m.max_staleness_observed, m.executions_per_window,
                  static_cast<unsigned long long>(m.dropped_beyond_bound),
                  static_cast<long long>(m.destage_backlog_bytes), m.live_windows, m.oom ? 1 : 0);
    out << buf;
  }
}

EngineConfig bench_engine_defaults() {
  EngineConfig c;
  c.block_capacity = 1'000;
  c.memory_budget_bytes = 256LL << 20;
  return c;
}

MetricsReport run_benchmark(const BenchConfig& config) {
  const WorkloadSpec& spec = config.workload;
  if (spec.max_ingestion_rate <= 0 || spec.window_duration_ms <= 0 || spec.run_watermarks <= 0 || spec.warmup_watermarks < 0)
    throw std::invalid_argument("invalid workload parameters");
  const TimeMs D = spec.window_duration_ms;
  const bool paced = config.time_scale > 0;

  EngineConfig ecfg = config.engine;
  ecfg.watermark_period_ms = D;
  if (paced) ecfg.lead_scale = config.time_scale;

  const bool write = !config.out_dir.empty();
  if (write) fs::create_directories(config.out_dir);
  std::ofstream firings_csv, schedule_csv;
  if (write) {
    firings_csv = open_csv(config.out_dir / "firings.csv");
    firings_csv << "watermark,operator,window_start,window_end,firing_seq,is_refinement,fired_at_ms,events,wall_us,stage_wait_us\n";
    schedule_csv = open_csv(config.out_dir / "schedule.csv");
    schedule_csv << "window_start,window_end,execution,offset_ms,expected_staleness\n";
  }

  int period = 0;  // index of the current watermark period, 1-based once measuring
  const int total_periods = spec.warmup_watermarks + spec.run_watermarks;
  auto measuring = [&] { return period >= spec.warmup_watermarks; };
  PeriodAcc acc;
  std::vector<double> reexec_rates;

  EngineObserver obs;
  obs.on_firing = [&](const FiringRecord& r) {
    if (config.on_result) config.on_result(r);
    const double secs = std::chrono::duration<double>(r.wall).count();
    acc.all_events += r.events;
    acc.all_s += secs;
    if (!r.is_refinement) {
      acc.initial_events += r.events;
      acc.initial_s += secs;
    }
    if (r.is_refinement && r.op == 0 && measuring()) reexec_rates.push_back(rate(static_cast<double>(r.events), secs));
    if (write)
      firings_csv << period << ',' << r.op << ',' << r.window.start << ',' << r.window.end << ',' << r.firing_seq << ','
                  << (r.is_refinement ? 1 : 0) << ',' << r.fired_at << ',' << r.events << ','
                  << std::chrono::duration_cast<std::chrono::microseconds>(r.wall).count() << ','
                  << std::chrono::duration_cast<std::chrono::microseconds>(r.stage_wait).count() << '\n';
  };
  obs.on_purge = [&](const WindowSummary& s) {
    if (s.op != 0) return;
    acc.max_staleness = std::max(acc.max_staleness, s.max_staleness_observed);
    ++acc.purged;
    acc.purged_reexecs += s.reexecutions;
  };
  obs.on_schedule = [&](std::size_t op, const WindowId& id, const ExecutionSchedule& s) {
    if (!write || op != 0) return;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%lld,%lld,%zu,%.3f,%.6f\n", static_cast<long long>(id.start),
                    static_cast<long long>(id.end), i + 1, s.times_ms[i], s.staleness[i]);
      schedule_csv << buf;
    }
  };

  MetricsReport report;
  std::vector<std::int64_t> all_samples;
  std::uint64_t measured_on_time = 0, measured_all = 0;
  double measured_seconds = 0;

  {
    Engine engine(workload_pipeline(spec), ecfg, obs);
    EventGenerator gen(spec, config.seed);
    PeriodicWatermarkSource wms(D, 0);

    const TimeMs t0 = ((spec.past_windows + 1) * D);
    const auto events_per_period = static_cast<std::uint64_t>(spec.max_ingestion_rate * static_cast<double>(D) / 1000.0);
    const std::uint64_t total_events = events_per_period * static_cast<std::uint64_t>(total_periods) + 1;
    const TimeMs tick_every = std::max<TimeMs>(1, std::min<TimeMs>(10, D / 100));
    const TimeMs sample_every = std::max<TimeMs>(1, D / std::max(1, config.samples_per_watermark));
    TimeMs next_tick = t0, next_sample = t0 + sample_every;

    const auto wall0 = Clock::now();
    acc.wall_start = wall0;
    wms.poll(t0);
    for (std::uint64_t i = 0; i < total_events && period < total_periods; ++i) {
      const TimeMs now = t0 + static_cast<TimeMs>(static_cast<double>(i) * 1000.0 / spec.max_ingestion_rate);
      if (paced) {
        const auto target = wall0 + std::chrono::microseconds(static_cast<std::int64_t>(
                                        static_cast<double>(now - t0) * 1000.0 / config.time_scale));
        if (target - Clock::now() > std::chrono::milliseconds(1)) std::this_thread::sleep_until(target);
      }
      GeneratedEvent g = gen.next(now);
      wms.observe(g.event.event_time);
      const IngestOutcome out = engine.ingest(g.source, std::move(g.event), now);
      acc.on_time += out.on_time;
      acc.all += out.on_time + out.late;

      if (now >= next_tick) {
        engine.tick(now);
        next_tick = now + tick_every;
      }
      if (now >= next_sample) {
        acc.samples.push_back(engine.tracked_state_bytes());
        next_sample += sample_every;
      }
      // Poll once the millisecond's events are in: timestamps are whole
      // milliseconds, and the first event at a period boundary is often late,
      // which would hold the closing window back a full period.
      const TimeMs next_now = t0 + static_cast<TimeMs>(static_cast<double>(i + 1) * 1000.0 / spec.max_ingestion_rate);
      if (next_now == now) continue;
      if (auto wm = wms.poll(now)) {
        engine.advance_watermark(*wm, now);
        engine.tick(now);
        const double wall_s = std::chrono::duration<double>(Clock::now() - acc.wall_start).count();
        const double virtual_s = static_cast<double>(D) / 1000.0;
        if (!paced && wall_s > 0) engine.set_lead_scale(static_cast<double>(D) / (wall_s * 1000.0));
        const double span = std::max(virtual_s, paced ? wall_s * config.time_scale : 0.0);
        const bool oom = engine.counters().over_budget;
        if (measuring()) {
          WatermarkMetrics m;
          m.watermark = period - spec.warmup_watermarks + 1;
          m.tracked_state_bytes = static_cast<std::int64_t>(median(acc.samples));
          m.tracked_state_peak_bytes = acc.samples.empty() ? 0 : *std::max_element(acc.samples.begin(), acc.samples.end());
          m.ingestion_rate_normal = rate(static_cast<double>(acc.on_time), span);
          m.ingestion_rate_all = rate(static_cast<double>(acc.all), span);
          m.processing_rate_normal = rate(static_cast<double>(acc.initial_events), acc.initial_s);
          m.processing_rate_all = rate(static_cast<double>(acc.all_events), acc.all_s);
          m.max_staleness_observed = acc.max_staleness;
          m.executions_per_window = acc.purged ? static_cast<double>(acc.purged_reexecs) / static_cast<double>(acc.purged) : 0;
          m.dropped_beyond_bound = engine.counters().dropped_beyond_bound;
          m.destage_backlog_bytes = engine.destage_backlog_bytes();
          m.live_windows = engine.live_windows();
          m.oom = oom;
          report.series.push_back(m);
          all_samples.insert(all_samples.end(), acc.samples.begin(), acc.samples.end());
          measured_on_time += acc.on_time;
          measured_all += acc.all;
          measured_seconds += span;
        }
        ++period;
        acc = PeriodAcc{};
        acc.wall_start = Clock::now();
        if (oom && config.stop_on_oom) break;
      }
    }
    report.counters = engine.counters();
    report.oom = engine.counters().over_budget;
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - wall0).count();
    if (write) {
      auto h = open_csv(config.out_dir / "histogram.csv");
      engine.histogram(0).write_csv(h);
    }
  }

  report.median_state_bytes = median(all_samples);
  report.peak_state_bytes = all_samples.empty() ? 0 : *std::max_element(all_samples.begin(), all_samples.end());
  report.ingestion_rate_normal = rate(static_cast<double>(measured_on_time), measured_seconds);
  report.ingestion_rate_all = rate(static_cast<double>(measured_all), measured_seconds);
  report.reexec_processing_rate = median(reexec_rates);
  report.reexecutions = reexec_rates.size();
  if (write) write_metrics_csv(config.out_dir / "metrics.csv", report.series);
  return report;
}

std::optional<std::size_t> TriggerStudy::executions(std::string_view distribution, TriggerKind trigger,
                                                    double bound) const {
  for (const auto& r : bounds)
    if (r.distribution == distribution && r.trigger == trigger && r.bound == bound) return r.executions;
  throw std::out_of_range("no such trigger-study row");
}

TriggerStudy run_trigger_study(const TriggerStudyConfig& config) {
  TriggerStudy study;
  for (const auto& name : config.distributions) {
    const ArrivalModel model = ArrivalModel::by_name(name);
    const StalenessParams unit{1.0, 1.0, 1.0};
    for (TriggerKind t : config.triggers)
      for (std::size_t k = 1; k <= config.max_k; ++k) {
        const auto schedule = trigger_schedule(t, k, model, unit);
        study.staleness.push_back({k, t, name, max_staleness(schedule, model, unit)});
      }
    for (double b : config.bounds)
      for (TriggerKind t : config.triggers)
        study.bounds.push_back({name, t, b,
                                executions_to_bound(t, model, {1.0, 1.0, b}, config.max_k, config.grid_bins)});
  }
  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    auto s = open_csv(config.out_dir / "trigger_study.csv");
    s << "k,trigger,distribution,max_staleness\n";
    for (const auto& r : study.staleness) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.9f\n", r.k, std::string(to_string(r.trigger)).c_str(),
                    r.distribution.c_str(), r.max_staleness);
      s << buf;
    }
    auto e = open_csv(config.out_dir / "executions_to_bound.csv");
    e << "distribution,trigger,bound,executions_to_bound\n";
    for (const auto& r : study.bounds) {
      e << r.distribution << ',' << to_string(r.trigger) << ',' << r.bound << ',';
      if (r.executions) e << *r.executions;
      e << '\n';
    }
  }
  return study;
}

}  // namespace latewin::bench
