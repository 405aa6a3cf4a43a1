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

#include "latewin/engine/engine.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <unistd.h>

#include "latewin/error.hpp"
#include "latewin/state/handle.hpp"
#include "latewin/state/memory_state.hpp"

namespace latewin {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Engine::Entry {
  WindowInstance window;
  std::shared_ptr<WindowState> state;
  WindowStateHandle* tiered = nullptr;

  bool fired = false;
  bool pending_initial = false;
  std::uint32_t next_seq = 0;
  TimeMs created_at = 0;
  TimeMs last_activity = 0;
  TimeMs last_fire_at = 0;
  bool timer_fired = false;

  std::uint64_t events = 0;
  std::uint64_t late_total = 0;
  std::uint64_t late_since_fire = 0;
  bool dirty = false;

  // Next re-execution time; for the staleness trigger the current plan point.
  std::optional<TimeMs> next_due;
  std::vector<TimeMs> plan;  // absolute times
  std::size_t plan_next = 0;

  bool prestaged = false;
  io::Ticket ticket;

  std::uint32_t reexecutions = 0;
  // (t since previous emission, late events in it) per refinement
  std::vector<std::pair<double, double>> intervals;
};

struct Engine::OperatorRuntime {
  std::size_t index = 0;
  const OperatorSpec* spec = nullptr;
  WindowAssigner assigner;
  std::vector<std::size_t> downstream;
  std::optional<TimeMs> watermark;
  std::map<WindowId, Entry> windows;
  std::set<WindowId> purged;
  LatenessHistogram histogram;
  TieredEnv env;
  CleanupConfig cleanup;
  mutable std::optional<std::pair<std::uint64_t, CleanupBound>> bound_cache;

  explicit OperatorRuntime(const OperatorSpec& s) : spec(&s), assigner(s.window) {}
};

namespace {

std::atomic<unsigned> session_counter{0};

TimeMs default_initial_bound(const WindowSpec& w) {
  switch (w.kind) {
    case WindowKind::Tumbling:
    case WindowKind::Sliding: return 100 * w.size;
    case WindowKind::Session: return 100 * w.gap;
    case WindowKind::Count: return 0;
  }
  return 0;
}

}  // namespace

Engine::Engine(Pipeline pipeline, EngineConfig config, EngineObserver observer)
    : pipeline_(std::move(pipeline)), config_(std::move(config)), observer_(std::move(observer)) {
  config_.validate();
  if (config_.backend == Backend::Aion) {
    session_dir_ = config_.state_root /
                   ("engine-" + std::to_string(::getpid()) + "-" + std::to_string(session_counter++));
    fs::remove_all(session_dir_);
    fs::create_directories(session_dir_);
    pool_ = std::make_unique<io::SerializationPool>(config_.resolved_workers(), config_.codec_cost_per_event);
    io_ = std::make_unique<io::IoScheduler>();
  }
  const auto& specs = pipeline_.operators();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto rt = std::make_unique<OperatorRuntime>(specs[i]);
    rt->index = i;
    rt->cleanup = config_.lateness.cleanup;
    if (rt->cleanup.initial_bound_ms == 0) rt->cleanup.initial_bound_ms = default_initial_bound(specs[i].window);
    if (io_) {
      rt->env.io = io_.get();
      rt->env.pool = pool_.get();
      rt->env.tracker = &tracker_;
      rt->env.dir = session_dir_ / ("op" + std::to_string(i));
      rt->env.config.block_capacity = config_.block_capacity;
      rt->env.config.mbucket_capacity = config_.mbucket_capacity;
      rt->env.config.io_latency_per_block = config_.io_latency_per_block;
    }
    for (const auto& in : specs[i].inputs) {
      if (auto up = pipeline_.find_operator(in)) ops_[*up]->downstream.push_back(i);
      else source_subscribers_[in].push_back(i);
    }
    ops_.push_back(std::move(rt));
  }
}

Engine::~Engine() {
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) e.state->purge();
  if (io_) io_->shutdown();
  ops_.clear();
  if (!session_dir_.empty()) {
    std::error_code ec;
    fs::remove_all(session_dir_, ec);
  }
}

std::shared_ptr<WindowState> Engine::make_state(const OperatorRuntime& rt, const WindowInstance& window) {
  if (config_.backend == Backend::Memory) return std::make_shared<MemoryWindowState>(window, &tracker_);
  return WindowStateHandle::create(window, rt.env);
}

TimeMs Engine::bound_ms(const OperatorRuntime& rt) const {
  if (config_.lateness.static_ms > 0) return config_.lateness.static_ms;
  if (!rt.bound_cache || rt.bound_cache->first != rt.histogram.n())
    rt.bound_cache.emplace(rt.histogram.n(), cleanup_bound(rt.histogram, rt.cleanup));
  return rt.bound_cache->second.bound_ms;
}

CleanupBound Engine::current_bound(std::size_t op) const {
  const auto& rt = *ops_.at(op);
  if (config_.lateness.static_ms > 0) return {config_.lateness.static_ms, 1.0, 0.0, rt.histogram.n(), false};
  bound_ms(rt);
  return rt.bound_cache->second;
}

const LatenessHistogram& Engine::histogram(std::size_t op) const { return ops_.at(op)->histogram; }

std::size_t Engine::live_windows() const {
  std::size_t n = 0;
  for (const auto& rt : ops_) n += rt->windows.size();
  return n;
}

std::size_t Engine::queued_reexecutions() const {
  std::size_t n = 0;
  for (const auto& rt : ops_)
    for (const auto& [id, e] : rt->windows)
      if (e.next_due && e.dirty) ++n;
  return n;
}

const WindowState* Engine::window_state(std::size_t op, const WindowId& id) const {
  const auto& w = ops_.at(op)->windows;
  auto it = w.find(id);
  return it == w.end() ? nullptr : it->second.state.get();
}

Engine::Entry& Engine::entry_for(OperatorRuntime& rt, const WindowInstance& window, TimeMs now) {
  auto [it, inserted] = rt.windows.try_emplace(window.id());
  Entry& e = it->second;
  if (inserted) {
    e.window = window;
    e.state = make_state(rt, window);
    e.tiered = dynamic_cast<WindowStateHandle*>(e.state.get());
    e.created_at = now;
    e.last_activity = now;
  }
  return e;
}

IngestOutcome Engine::ingest(std::string_view source, Event event, TimeMs now) {
  auto it = source_subscribers_.find(source);
  if (it == source_subscribers_.end()) {
    if (!pipeline_.has_source(source)) throw std::invalid_argument("unknown source: " + std::string(source));
    return {};
  }
  IngestOutcome outcome;
  const auto& subs = it->second;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (i + 1 == subs.size()) route(subs[i], std::move(event), now, outcome);
    else route(subs[i], event, now, outcome);
  }
  return outcome;
}

void Engine::merge_sessions(OperatorRuntime& rt, const std::vector<WindowInstance>& merged,
                            const WindowInstance& into, TimeMs now) {
  Entry& target = entry_for(rt, into, now);
  for (const auto& m : merged) {
    auto it = rt.windows.find(m.id());
    if (it == rt.windows.end() || m.id() == into.id()) continue;
    auto cursor = it->second.state->iterate();
    std::vector<Event> moved;
    while (const Event* ev = cursor->next()) moved.push_back(*ev);
    cursor.reset();
    for (auto& ev : moved) target.state->append(std::move(ev), now);
    target.events += it->second.events;
    it->second.state->purge();
    rt.windows.erase(it);
  }
}

void Engine::route(std::size_t op, Event event, TimeMs now, IngestOutcome& outcome) {
  OperatorRuntime& rt = *ops_[op];
  const WindowSpec& spec = rt.spec->window;
  const std::string key = rt.spec->keyed ? event.key : std::string();

  std::vector<WindowInstance> windows;
  bool count_full = false;
  if (spec.kind == WindowKind::Tumbling || spec.kind == WindowKind::Sliding) {
    windows = assign_windows(Event{key, event.event_time, {}}, spec);
  } else {
    Assignment a = rt.assigner.assign(Event{key, event.event_time, {}});
    windows = std::move(a.windows);
    count_full = a.count_window_full;
    if (!a.merged.empty() && !windows.empty()) merge_sessions(rt, a.merged, windows.front(), now);
  }

  for (std::size_t i = 0; i < windows.size(); ++i) {
    const WindowInstance& w = windows[i];
    const bool time_based = spec.kind != WindowKind::Count;
    const bool late = time_based && rt.watermark && w.end <= *rt.watermark;
    if (late) {
      rt.histogram.observe(now - w.end);
      if (now >= w.end + bound_ms(rt) || rt.purged.count(w.id())) {
        ++outcome.dropped;
        ++counters_.dropped_beyond_bound;
        continue;
      }
    }
    Entry& e = entry_for(rt, w, now);
    if (i + 1 == windows.size()) e.state->append(std::move(event), now);
    else e.state->append(event, now);
    ++e.events;
    e.last_activity = now;
    e.timer_fired = false;
    if (late) {
      ++outcome.late;
      ++counters_.late;
      ++e.late_total;
      ++e.late_since_fire;
      e.dirty = true;
      if (!e.fired) e.pending_initial = true;
      else on_late(rt, e, now);
    } else {
      ++outcome.on_time;
      ++counters_.on_time;
    }
  }

  if (count_full && !windows.empty()) {
    // Count windows fire as soon as they fill; they never see late events.
    Entry& e = rt.windows.at(windows.front().id());
    fire(rt, e, false, now, Clock::now());
    purge_entry(rt, e, now);
  }
}

void Engine::on_late(OperatorRuntime& rt, Entry& e, TimeMs now) {
  if (config_.trigger.mode != TriggerMode::Standard) return;
  const LateEventAction action = on_late_event(watermark_kind_, e.next_due.has_value());
  if (action.schedule_reexecution) {
    TimeMs due = now;
    if (config_.watermark_period_ms > 0 && watermark_kind_ == WatermarkKind::Periodic)
      due = std::max(now, last_watermark_at_ + config_.watermark_period_ms);
    e.next_due = due;
  }
  if (action.prestage_now && e.tiered && config_.prestage && !e.prestaged) {
    e.ticket = e.state->stage();
    e.prestaged = true;
    ++counters_.prestages;
  }
  (void)rt;
}

bool Engine::advance_watermark(const Watermark& wm, TimeMs now) {
  if (watermark_ && wm.timestamp < *watermark_) {
    ++counters_.dropped_watermarks;
    return false;
  }
  watermark_ = wm.timestamp;
  watermark_kind_ = wm.kind;
  last_watermark_at_ = now;
  for (auto& rt : ops_) {
    rt->watermark = wm.timestamp;
    std::vector<Entry*> expired;
    for (auto& [id, e] : rt->windows) {
      e.last_activity = now;
      e.timer_fired = false;
      if (!e.fired && rt->spec->window.kind != WindowKind::Count && e.window.end <= wm.timestamp)
        expired.push_back(&e);
    }
    std::sort(expired.begin(), expired.end(), [](const Entry* a, const Entry* b) {
      return std::tie(a->window.end, a->window.start, a->window.key) <
             std::tie(b->window.end, b->window.start, b->window.key);
    });
    for (Entry* e : expired) {
      e->pending_initial = false;
      if (fire(*rt, *e, false, now, Clock::now())) after_initial(*rt, *e, now);
      else e->pending_initial = true;
    }
  }
  return true;
}

void Engine::after_initial(OperatorRuntime& rt, Entry& e, TimeMs now) {
  e.state->destage(config_.policy.keep_fraction());
  if (config_.trigger.mode == TriggerMode::Staleness) install_schedule(rt, e);
  advance_plan(e, now);
}

void Engine::install_schedule(OperatorRuntime& rt, Entry& e) {
  const double T = static_cast<double>(std::max<TimeMs>(1, bound_ms(rt)));
  const StalenessParams params{T, 1.0, config_.trigger.bound};
  const bool observed = rt.histogram.n() >= rt.cleanup.n_min;
  const ArrivalModel model =
      observed ? ArrivalModel::empirical(rt.histogram, T) : ArrivalModel::by_name(config_.trigger.model);
  ExecutionSchedule schedule;
  try {
    schedule = plan_executions(model, params, config_.trigger.grid_bins);
  } catch (const InfeasibleBound&) {
    schedule = baseline_deltat(30, model, params);
  }
  e.plan.clear();
  for (double t : schedule.times_ms) {
    const TimeMs at = e.window.end + static_cast<TimeMs>(t + 0.5);
    if (e.plan.empty() || at > e.plan.back()) e.plan.push_back(at);
  }
  e.plan_next = 0;
  if (observer_.on_schedule) observer_.on_schedule(rt.index, e.window.id(), schedule);
}

// Moves the staleness plan past `now`; points that went by without new
// events are skipped.
void Engine::advance_plan(Entry& e, TimeMs now) {
  if (config_.trigger.mode != TriggerMode::Staleness) return;
  while (e.plan_next < e.plan.size() && e.plan[e.plan_next] <= now) ++e.plan_next;
  if (e.plan_next < e.plan.size()) e.next_due = e.plan[e.plan_next];
  else e.next_due.reset();
}

void Engine::harvest(Entry& e) {
  if (!e.tiered) return;
  if (auto stats = e.tiered->take_stage_stats())
    estimator_.update(stats->events, std::chrono::duration<double, std::milli>(stats->elapsed).count());
}

bool Engine::fire(OperatorRuntime& rt, Entry& e, bool refinement, TimeMs now, Clock::time_point due_wall) {
  const OperatorSpec& spec = *rt.spec;
  Clock::duration waited{0};
  std::size_t events = 0;
  UdfResult result;
  try {
    if (e.tiered) {
      const auto w0 = Clock::now();
      if (e.prestaged && e.ticket.valid()) e.ticket.wait();
      if (spec.mode == OperatorMode::Blocking && !e.state->fully_staged()) {
        io::Ticket t = e.state->stage();
        if (t.valid()) t.wait();
        if (!e.state->fully_staged()) throw StorageRead("window " + e.window.id().str() + " could not be staged");
      }
      waited = Clock::now() - w0;
      harvest(e);
    }
    CursorOptions opts;
    if (spec.mode == OperatorMode::NonBlocking) {
      opts.lookahead_blocks = 2;
      opts.release_consumed = true;
    }
    auto cursor = e.state->iterate(opts);
    struct Counting final : EventCursor {
      EventCursor& inner;
      std::size_t n = 0;
      explicit Counting(EventCursor& c) : inner(c) {}
      const Event* next() override {
        const Event* ev = inner.next();
        if (ev) ++n;
        return ev;
      }
    } counting(*cursor);
    FiringContext ctx{e.window, e.next_seq, refinement};
    result = spec.udf(ctx, counting);
    events = counting.n;
  } catch (const StorageRead&) {
    ++counters_.failed_firings;
    if (e.tiered) e.state->release_staged();
    e.prestaged = false;
    return false;
  }
  if (e.tiered && refinement) {
    // Blocks reclaimed from an unfinished destage are resident now; send
    // them back as well.
    e.state->release_staged();
    e.state->destage(config_.policy.keep_fraction());
  }
  e.prestaged = false;
  e.ticket = {};

  FiringRecord rec;
  rec.op = rt.index;
  rec.window = e.window.id();
  rec.firing_seq = e.next_seq;
  rec.is_refinement = refinement;
  rec.fired_at = now;
  rec.events = events;
  rec.wall = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - due_wall);
  rec.stage_wait = std::chrono::duration_cast<std::chrono::nanoseconds>(waited);
  rec.value = std::move(result.value);

  if (refinement) {
    e.intervals.emplace_back(static_cast<double>(now - e.last_fire_at), static_cast<double>(e.late_since_fire));
    ++e.reexecutions;
    ++counters_.reexecutions;
  } else {
    e.fired = true;
    ++counters_.initial_firings;
  }
  e.late_since_fire = 0;
  e.dirty = false;
  e.last_fire_at = now;
  const std::uint32_t seq = e.next_seq++;

  if (!rt.downstream.empty()) {
    const TimeMs ts = std::max<TimeMs>(0, e.window.end - 1);
    const auto origin = static_cast<std::uint16_t>(rt.index);
    std::vector<Event> out;
    out.reserve(result.emit.size() + 1);
    out.push_back(Event{"", ts, tag_emission(origin, e.window, seq, {})});
    for (auto& em : result.emit) out.push_back(Event{std::move(em.key), ts, tag_emission(origin, e.window, seq, em.payload)});
    for (std::size_t d : rt.downstream) {
      IngestOutcome ignored;
      for (const auto& ev : out) route(d, ev, now, ignored);
    }
  }
  if (observer_.on_firing) observer_.on_firing(rec);
  return true;
}

void Engine::fire_pending_initial(TimeMs now, std::size_t& fired) {
  for (auto& rt : ops_) {
    std::vector<Entry*> pending;
    for (auto& [id, e] : rt->windows)
      if (e.pending_initial && !e.fired) pending.push_back(&e);
    std::sort(pending.begin(), pending.end(), [](const Entry* a, const Entry* b) {
      return std::tie(a->window.end, a->window.start, a->window.key) <
             std::tie(b->window.end, b->window.start, b->window.key);
    });
    for (Entry* e : pending) {
      e->pending_initial = false;
      if (fire(*rt, *e, false, now, Clock::now())) {
        after_initial(*rt, *e, now);
        ++fired;
      }
    }
  }
}

std::size_t Engine::run_reexecutions(TimeMs now) {
  std::size_t fired = 0;
  // Current-window firings go first.
  fire_pending_initial(now, fired);

  struct Due {
    TimeMs due;
    std::size_t op;
    WindowId id;
  };
  std::vector<Due> due;
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows)
      if (e.fired && e.next_due && *e.next_due <= now) due.push_back({*e.next_due, rt->index, id});
  std::sort(due.begin(), due.end(),
            [](const Due& a, const Due& b) { return std::tie(a.due, a.op, a.id) < std::tie(b.due, b.op, b.id); });

  for (const Due& d : due) {
    OperatorRuntime& rt = *ops_[d.op];
    auto it = rt.windows.find(d.id);
    if (it == rt.windows.end()) continue;
    Entry& e = it->second;
    const auto due_wall = Clock::now();
    if (e.dirty) {
      if (fire(rt, e, true, now, due_wall)) ++fired;
    } else if (e.prestaged) {
      // Prestaged for a plan point that brought no new events.
      if (e.ticket.valid()) e.ticket.wait();
      harvest(e);
      e.state->release_staged();
      e.prestaged = false;
    }
    if (config_.trigger.mode == TriggerMode::Standard) e.next_due.reset();
    else advance_plan(e, now);
  }
  return fired;
}

std::optional<TimeMs> Engine::preceding_expiry(const OperatorRuntime& rt, const Entry& e) const {
  const WindowSpec& spec = rt.spec->window;
  TimeMs step = 0;
  if (spec.kind == WindowKind::Tumbling) step = spec.size;
  else if (spec.kind == WindowKind::Sliding) step = spec.slide;
  else return std::nullopt;
  return e.window.end - step + bound_ms(rt);
}

void Engine::launch_prestages(TimeMs now) {
  if (!io_ || !config_.prestage) return;
  std::size_t active = 0;
  struct Candidate {
    TimeMs due;
    std::size_t op;
    Entry* e;
    double lead;
    double start;
  };
  std::vector<Candidate> candidates;
  // Stages run one after another, so in-flight ones delay everything queued
  // behind them.
  double queued_ms = 0;
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) {
      if (!e.prestaged) continue;
      ++active;
      if (e.ticket.valid() && !e.ticket.finished())
        queued_ms += estimator_.lead_ms(e.state->persistent_events()) * config_.lead_scale;
    }
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) {
      if (e.prestaged || !e.fired || !e.next_due || !e.dirty) continue;
      if (e.state->phase() != Phase::Destaged) continue;
      const double lead = estimator_.lead_ms(e.state->persistent_events()) * config_.lead_scale;
      const auto first = e.reexecutions == 0 ? preceding_expiry(*rt, e) : std::nullopt;
      candidates.push_back({*e.next_due, rt->index, &e, lead, static_cast<double>(plan_prestage(now, *e.next_due, lead, first))});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.due, a.op, a.e->window.start) < std::tie(b.due, b.op, b.e->window.start);
  });
  // Latest start in due order: a stage must also be done before the next
  // one has to begin.
  double next_start = std::numeric_limits<double>::infinity();
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    it->start = std::min(it->start, next_start - it->lead);
    next_start = it->start;
  }
  std::erase_if(candidates, [&](const Candidate& c) { return c.start - queued_ms > static_cast<double>(now); });
  for (const Candidate& c : candidates) {
    if (active >= config_.prestage_depth) break;
    c.e->ticket = c.e->state->stage();
    c.e->prestaged = true;
    ++active;
    ++counters_.prestages;
  }
}

void Engine::purge_entry(OperatorRuntime& rt, Entry& e, TimeMs now) {
  WindowSummary s;
  s.op = rt.index;
  s.window = e.window.id();
  s.reexecutions = e.reexecutions;
  s.events = e.events;
  s.late_events = e.late_total;
  s.purged_at = now;
  if (e.late_total > 0) {
    const double T = static_cast<double>(std::max<TimeMs>(1, now - e.window.end));
    const double N = static_cast<double>(e.late_total);
    double worst = 0;
    for (const auto& [t, n] : e.intervals) worst = std::max(worst, t * n / (T * N));
    if (e.late_since_fire > 0)
      worst = std::max(worst, static_cast<double>(now - e.last_fire_at) * static_cast<double>(e.late_since_fire) / (T * N));
    s.max_staleness_observed = worst;
  }
  if (e.next_due && e.dirty) ++counters_.cancelled_reexecutions;
  e.state->purge();
  if (rt.spec->window.kind == WindowKind::Session) rt.assigner.forget_session(e.window);
  ++counters_.purges;
  const WindowId id = e.window.id();
  if (rt.spec->window.kind != WindowKind::Count) rt.purged.insert(id);
  rt.windows.erase(id);
  if (observer_.on_purge) observer_.on_purge(s);
}

std::size_t Engine::purge_pass(TimeMs now) {
  std::size_t n = 0;
  for (auto& rt : ops_) {
    const TimeMs bound = bound_ms(*rt);
    std::vector<WindowId> victims;
    for (auto& [id, e] : rt->windows)
      if (e.fired && now >= e.window.end + bound) victims.push_back(id);
    for (const auto& id : victims) {
      purge_entry(*rt, rt->windows.at(id), now);
      ++n;
    }
  }
  return n;
}

void Engine::apply_timers(TimeMs now) {
  if (config_.policy.kind == PolicyKind::Standard || config_.policy.tau_ms <= 0) return;
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) {
      if (e.timer_fired || e.prestaged) continue;
      if (!timer_elapsed(config_.policy, e.last_activity, now)) continue;
      e.state->destage(config_.policy.keep_fraction());
      e.timer_fired = true;
      ++counters_.timer_destages;
    }
}

void Engine::apply_pressure(TimeMs now) {
  const std::int64_t used = tracker_.state_bytes();
  counters_.peak_state_bytes = std::max(counters_.peak_state_bytes, used);
  if (config_.memory_budget_bytes <= 0) return;
  if (used > config_.memory_budget_bytes) counters_.over_budget = true;
  if (config_.policy.kind != PolicyKind::Global) return;
  const PressureLevel level = pressure_level(config_.policy, used, config_.memory_budget_bytes);
  if (level == PressureLevel::None) return;
  std::vector<Entry*> entries;
  std::vector<WindowLoad> loads;
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) {
      if (e.prestaged) continue;
      const auto bytes = static_cast<std::int64_t>(e.state->memory_bytes());
      if (bytes == 0) continue;
      const double age_s = static_cast<double>(std::max<TimeMs>(1, now - e.created_at)) / 1000.0;
      loads.push_back({entries.size(), bytes, static_cast<double>(e.events) / age_s});
      entries.push_back(&e);
    }
  for (const DestageAction& a : on_memory_pressure(level, loads, config_.policy, used, config_.memory_budget_bytes)) {
    entries[a.index]->state->destage(a.keep_fraction);
    ++counters_.pressure_destages;
  }
}

void Engine::tick(TimeMs now) {
  if (io_) {
    for (auto& rt : ops_)
      for (auto& [id, e] : rt->windows) {
        if (e.fired) e.state->flush_late(now, config_.late_write_batch_ms);
        if (e.prestaged && e.ticket.valid() && e.ticket.finished()) harvest(e);
      }
    launch_prestages(now);
  }
  run_reexecutions(now);
  purge_pass(now);
  apply_timers(now);
  apply_pressure(now);
}

void Engine::flush(TimeMs now) {
  if (!io_) return;
  for (auto& rt : ops_)
    for (auto& [id, e] : rt->windows) e.state->flush_late(now, 0, true);
  io_->drain();
}

}  // namespace latewin
