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

#include "latewin/bench/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace latewin::bench {

namespace {

void put_i64(Bytes& out, std::int64_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 8);
}

void put_i32(Bytes& out, std::int32_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 4);
}

Bytes tagged(char tag, std::initializer_list<std::int64_t> values) {
  Bytes out{static_cast<std::uint8_t>(tag)};
  for (auto v : values) put_i64(out, v);
  return out;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string symbol(std::size_t i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "S%02zu", i);
  return buf;
}

std::string segment_key(std::int64_t s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "seg%03lld", static_cast<long long>(s));
  return buf;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

WorkloadKind workload_by_name(std::string_view name) {
  if (name == "average") return WorkloadKind::Average;
  if (name == "bigrams") return WorkloadKind::Bigrams;
  if (name == "stockmarket" || name == "stock") return WorkloadKind::StockMarket;
  if (name == "lrb") return WorkloadKind::Lrb;
  throw std::invalid_argument("unknown workload: " + std::string(name));
}

std::string_view to_string(WorkloadKind kind) noexcept {
  switch (kind) {
    case WorkloadKind::Average: return "average";
    case WorkloadKind::Bigrams: return "bigrams";
    case WorkloadKind::StockMarket: return "stockmarket";
    case WorkloadKind::Lrb: return "lrb";
  }
  return "?";
}

Profile profile_by_name(std::string_view name) {
  if (name == "desk") return Profile::Desk;
  if (name == "full") return Profile::Full;
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

WorkloadSpec WorkloadSpec::defaults(WorkloadKind kind, Profile profile) {
  WorkloadSpec s;
  s.kind = kind;
  switch (kind) {
    case WorkloadKind::Average: s.max_ingestion_rate = 10'000; s.window_duration_ms = 20'000; s.payload_bytes = 2'304; break;
    case WorkloadKind::Bigrams: s.max_ingestion_rate = 5'000; s.window_duration_ms = 30'000; s.payload_bytes = 3'584; break;
    case WorkloadKind::StockMarket: s.max_ingestion_rate = 10'000; s.window_duration_ms = 30'000; s.payload_bytes = 1'664; break;
    case WorkloadKind::Lrb: s.max_ingestion_rate = 10'000; s.window_duration_ms = 60'000; s.payload_bytes = 1'536; break;
  }
  s.slide_size_ms = 10'000;
  s.slide_ms = 5'000;
  if (profile == Profile::Desk) {
    s.window_duration_ms /= 10;
    s.slide_size_ms /= 10;
    s.slide_ms /= 10;
  }
  return s;
}

DelayModel::DelayModel(int past_windows, double mu, double sigma)
    : past_windows_(past_windows), mu_(mu), sigma_(sigma), dist_(mu, sigma) {
  if (past_windows < 0) throw std::invalid_argument("past_windows must be >= 0");
}

int DelayModel::sample(std::mt19937_64& rng) {
  const double x = dist_(rng);
  if (x >= past_windows_) return past_windows_;
  return static_cast<int>(std::floor(x));
}

double DelayModel::probability(int i) const {
  if (i < 0 || i > past_windows_) return 0.0;
  auto cdf = [&](double x) { return x <= 0 ? 0.0 : phi((std::log(x) - mu_) / sigma_); };
  if (i == past_windows_) return 1.0 - cdf(i);
  return cdf(i + 1) - cdf(i);
}

Bytes average_payload(std::int64_t value) {
  Bytes b;
  put_i64(b, value);
  return b;
}

Bytes bigrams_payload(std::string_view sentence) {
  Bytes b;
  const auto n = static_cast<std::uint16_t>(std::min<std::size_t>(sentence.size(), 0xffff));
  b.push_back(static_cast<std::uint8_t>(n & 0xff));
  b.push_back(static_cast<std::uint8_t>(n >> 8));
  b.insert(b.end(), sentence.begin(), sentence.begin() + n);
  return b;
}

Bytes tick_payload(std::int64_t price_cents) { return average_payload(price_cents); }

Bytes lrb_payload(std::int32_t segment, std::int32_t position, std::int32_t speed) {
  Bytes b;
  put_i32(b, segment);
  put_i32(b, position);
  put_i32(b, speed);
  return b;
}

std::int64_t read_i64(const Bytes& p, std::size_t offset) {
  std::int64_t v = 0;
  if (p.size() >= offset + 8) std::memcpy(&v, p.data() + offset, 8);
  return v;
}

std::int32_t read_i32(const Bytes& p, std::size_t offset) {
  std::int32_t v = 0;
  if (p.size() >= offset + 4) std::memcpy(&v, p.data() + offset, 4);
  return v;
}

std::string_view read_sentence(const Bytes& p) {
  if (p.size() < 2) return {};
  const std::size_t n = std::min<std::size_t>(p[0] | (p[1] << 8), p.size() - 2);
  return {reinterpret_cast<const char*>(p.data() + 2), n};
}

EventGenerator::EventGenerator(const WorkloadSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed), delay_(spec.past_windows) {
  // Zipf(1.1) over a synthetic vocabulary.
  const std::size_t vocab = 4'000;
  std::vector<double> weights(vocab);
  for (std::size_t r = 0; r < vocab; ++r) {
    std::string w;
    std::size_t x = r;
    do {
      w.push_back(static_cast<char>('a' + x % 26));
      x /= 26;
    } while (x > 0);
    vocabulary_.push_back(w);
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), 1.1);
  }
  zipf_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  for (std::size_t s = 0; s < kStockSymbols; ++s) base_price_.push_back(1'000 + static_cast<std::int64_t>(rng_() % 50'000));
}

void EventGenerator::fill(Bytes& payload, std::size_t from) {
  payload.resize(std::max(payload.size(), spec_.payload_bytes));
  std::size_t i = from;
  for (; i + 8 <= payload.size(); i += 8) {
    const std::uint64_t r = rng_();
    std::memcpy(payload.data() + i, &r, 8);
  }
  for (; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(rng_());
}

std::string EventGenerator::sentence() {
  const std::size_t words = 5 + rng_() % 26;
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s.push_back(' ');
    s += vocabulary_[zipf_(rng_)];
  }
  return s;
}

GeneratedEvent EventGenerator::next(TimeMs now) {
  GeneratedEvent g;
  g.window_index = delay_.sample(rng_);
  g.event.event_time = std::max<TimeMs>(0, now - g.window_index * spec_.window_duration_ms);
  std::size_t header = 0;
  switch (spec_.kind) {
    case WorkloadKind::Average:
      g.source = "events";
      g.event.payload = average_payload(static_cast<std::int64_t>(rng_() % 1'000));
      break;
    case WorkloadKind::Bigrams:
      g.source = "tweets";
      g.event.payload = bigrams_payload(sentence());
      break;
    case WorkloadKind::StockMarket: {
      const std::size_t s = rng_() % kStockSymbols;
      g.event.key = symbol(s);
      if (rng_() % 10 == 0) {
        g.source = "tweets";
      } else {
        g.source = "ticks";
        std::int64_t permille = static_cast<std::int64_t>(rng_() % 41) - 20;
        if (rng_() % 200 == 0) permille = (rng_() % 2 ? 1 : -1) * (60 + static_cast<std::int64_t>(rng_() % 40));
        g.event.payload = tick_payload(base_price_[s] * (1'000 + permille) / 1'000);
      }
      break;
    }
    case WorkloadKind::Lrb: {
      const auto vehicle = static_cast<std::int32_t>(rng_() % 4'000);
      g.event.key = "v" + std::to_string(vehicle);
      g.source = "reports";
      const auto segment = static_cast<std::int32_t>((vehicle * 7 + now / 30'000) % kLrbSegments);
      std::int32_t position = static_cast<std::int32_t>(rng_() % 5'280);
      std::int32_t speed = segment % 4 == 0 ? 10 + static_cast<std::int32_t>(rng_() % 40)
                                           : 40 + static_cast<std::int32_t>(rng_() % 61);
      if (rng_() % 500 == 0) {
        speed = 0;
        position = (segment * 13) % 5'280;
      }
      g.event.payload = lrb_payload(segment, position, speed);
      break;
    }
  }
  header = g.event.payload.size();
  fill(g.event.payload, header);
  return g;
}

UdfResult average_udf(const FiringContext&, EventCursor& events) {
  std::int64_t sum = 0, n = 0;
  while (const Event* e = events.next()) {
    sum += read_i64(e->payload);
    ++n;
  }
  const double mean = n ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
  return {"count=" + std::to_string(n) + " sum=" + std::to_string(sum) + " mean=" + fixed(mean), {}};
}

UdfResult bigrams_udf(const FiringContext&, EventCursor& events) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  while (const Event* e = events.next()) {
    const std::string_view s = read_sentence(e->payload);
    std::size_t prev_b = 0, prev_e = std::string_view::npos;
    std::size_t i = 0;
    while (i <= s.size()) {
      const std::size_t j = std::min(s.find(' ', i), s.size());
      if (j > i) {
        if (prev_e != std::string_view::npos) {
          ++counts[std::string(s.substr(prev_b, j - prev_b))];
          ++total;
        }
        prev_b = i;
        prev_e = j;
      }
      i = j + 1;
    }
  }
  // Order-independent digest of the whole table plus the top entries.
  std::uint64_t digest = 0;
  std::vector<std::pair<std::uint64_t, const std::string*>> top;
  for (const auto& [k, c] : counts) {
    digest += mix(fnv(k) ^ mix(c));
    top.emplace_back(c, &k);
  }
  const std::size_t keep = std::min<std::size_t>(3, top.size());
  std::partial_sort(top.begin(), top.begin() + keep, top.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : *a.second < *b.second;
  });
  std::string value = "bigrams=" + std::to_string(total) + " distinct=" + std::to_string(counts.size()) +
                      " digest=" + std::to_string(digest);
  for (std::size_t i = 0; i < keep; ++i) value += " [" + *top[i].second + "]=" + std::to_string(top[i].first);
  return {value, {}};
}

UdfResult rolling_udf(const FiringContext&, EventCursor& events) {
  struct Agg {
    std::int64_t min = INT64_MAX, max = INT64_MIN, sum = 0, n = 0;
  };
  std::map<std::string, Agg> per;
  while (const Event* e = events.next()) {
    const std::int64_t p = read_i64(e->payload);
    Agg& a = per[e->key];
    a.min = std::min(a.min, p);
    a.max = std::max(a.max, p);
    a.sum += p;
    ++a.n;
  }
  UdfResult r;
  for (const auto& [sym, a] : per) {
    const std::int64_t mean = a.sum / a.n;
    r.value += sym + ":" + std::to_string(a.min) + "," + std::to_string(a.max) + "," + std::to_string(mean) + ";";
    r.emit.push_back({sym, tagged('R', {a.min, a.max, mean})});
  }
  return r;
}

UdfResult alert_count_udf(const FiringContext&, EventCursor& events) {
  std::map<std::string, std::int64_t> alerts;
  for (const auto& em : latest_emissions(events)) {
    if (em.body.size() < 25 || em.body[0] != 'R') continue;
    const std::int64_t mn = read_i64(em.body, 1), mx = read_i64(em.body, 9);
    if (mn > 0 && (mx - mn) * 100 >= 5 * mn) ++alerts[em.key];
  }
  UdfResult r;
  for (const auto& [sym, n] : alerts) {
    r.value += sym + "=" + std::to_string(n) + ";";
    r.emit.push_back({sym, tagged('A', {n})});
  }
  return r;
}

UdfResult mention_count_udf(const FiringContext&, EventCursor& events) {
  std::map<std::string, std::int64_t> mentions;
  while (const Event* e = events.next()) ++mentions[e->key];
  UdfResult r;
  for (const auto& [sym, n] : mentions) {
    r.value += sym + "=" + std::to_string(n) + ";";
    r.emit.push_back({sym, tagged('M', {n})});
  }
  return r;
}

UdfResult correlate_udf(const FiringContext&, EventCursor& events) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> joined;  // alerts, mentions
  std::set<std::string> has_alert, has_mention;
  for (const auto& em : latest_emissions(events)) {
    if (em.body.size() < 9) continue;
    auto& j = joined[em.key];
    if (em.body[0] == 'A') {
      j.first += read_i64(em.body, 1);
      has_alert.insert(em.key);
    } else if (em.body[0] == 'M') {
      j.second += read_i64(em.body, 1);
      has_mention.insert(em.key);
    }
  }
  std::vector<std::pair<double, double>> xy;
  std::string pairs;
  for (const auto& [sym, v] : joined) {
    if (!has_alert.count(sym) || !has_mention.count(sym)) continue;
    xy.emplace_back(static_cast<double>(v.first), static_cast<double>(v.second));
    pairs += sym + ":" + std::to_string(v.first) + "/" + std::to_string(v.second) + ";";
  }
  double corr = 0;
  if (xy.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : xy) mx += x, my += y;
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (auto [x, y] : xy) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
      syy += (y - my) * (y - my);
    }
    if (sxx > 0 && syy > 0) corr = sxy / std::sqrt(sxx * syy);
  }
  return {"joined=" + std::to_string(xy.size()) + " corr=" + fixed(corr, 6) + " " + pairs, {}};
}

UdfResult segment_stats_udf(const FiringContext&, EventCursor& events) {
  std::map<std::int32_t, std::pair<std::int64_t, std::int64_t>> per;  // count, speed sum
  while (const Event* e = events.next()) {
    auto& s = per[read_i32(e->payload, 0)];
    ++s.first;
    s.second += read_i32(e->payload, 8);
  }
  UdfResult r;
  for (const auto& [seg, s] : per) {
    const std::int64_t avg = s.second / s.first;
    r.value += std::to_string(seg) + ":" + std::to_string(s.first) + "," + std::to_string(avg) + ";";
    r.emit.push_back({segment_key(seg), tagged('S', {s.first, avg})});
  }
  return r;
}

UdfResult accident_udf(const FiringContext&, EventCursor& events) {
  std::map<std::pair<std::int32_t, std::int32_t>, std::set<std::string>> stopped;
  while (const Event* e = events.next())
    if (read_i32(e->payload, 8) == 0) stopped[{read_i32(e->payload, 0), read_i32(e->payload, 4)}].insert(e->key);
  std::set<std::int32_t> segments;
  for (const auto& [where, vehicles] : stopped)
    if (vehicles.size() >= 2) segments.insert(where.first);
  UdfResult r;
  for (auto seg : segments) {
    r.value += std::to_string(seg) + ";";
    r.emit.push_back({segment_key(seg), tagged('X', {1})});
  }
  return r;
}

std::int64_t lrb_toll(std::int64_t count, std::int64_t avg_speed, bool accident) noexcept {
  if (accident) return 0;
  if (avg_speed < 40 && count > 50) return 2 * (count - 50) * (count - 50);
  return 0;
}

UdfResult toll_udf(const FiringContext&, EventCursor& events) {
  struct Seg {
    std::int64_t count = 0, speed_sum = 0, windows = 0;
    bool accident = false;
  };
  std::map<std::string, Seg> per;
  for (const auto& em : latest_emissions(events)) {
    if (em.body.empty()) continue;
    Seg& s = per[em.key];
    if (em.body[0] == 'S' && em.body.size() >= 17) {
      s.count += read_i64(em.body, 1);
      s.speed_sum += read_i64(em.body, 9);
      ++s.windows;
    } else if (em.body[0] == 'X') {
      s.accident = true;
    }
  }
  std::int64_t total = 0, tolled = 0, accidents = 0;
  std::string list;
  for (const auto& [seg, s] : per) {
    const std::int64_t avg = s.windows ? s.speed_sum / s.windows : 0;
    const std::int64_t toll = lrb_toll(s.count, avg, s.accident);
    accidents += s.accident;
    if (toll > 0) {
      ++tolled;
      list += seg + "=" + std::to_string(toll) + ";";
    }
    total += toll;
  }
  return {"segments=" + std::to_string(per.size()) + " accidents=" + std::to_string(accidents) +
              " tolled=" + std::to_string(tolled) + " total=" + std::to_string(total) + " " + list,
          {}};
}

std::vector<std::string> workload_sources(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Average: return {"events"};
    case WorkloadKind::Bigrams: return {"tweets"};
    case WorkloadKind::StockMarket: return {"ticks", "tweets"};
    case WorkloadKind::Lrb: return {"reports"};
  }
  return {};
}

Pipeline workload_pipeline(const WorkloadSpec& spec) {
  Pipeline p;
  for (auto& s : workload_sources(spec.kind)) p.add_source(s);
  const auto tumbling = WindowSpec::tumbling(spec.window_duration_ms);
  using M = OperatorMode;
  switch (spec.kind) {
    case WorkloadKind::Average:
      p.add_operator({"average", tumbling, M::NonBlocking, average_udf, {"events"}});
      break;
    case WorkloadKind::Bigrams:
      p.add_operator({"bigrams", tumbling, M::NonBlocking, bigrams_udf, {"tweets"}});
      break;
    case WorkloadKind::StockMarket:
      p.add_operator({"rolling", WindowSpec::sliding(spec.slide_size_ms, spec.slide_ms), M::NonBlocking, rolling_udf, {"ticks"}});
      p.add_operator({"alerts", tumbling, M::Blocking, alert_count_udf, {"rolling"}});
      p.add_operator({"mentions", tumbling, M::NonBlocking, mention_count_udf, {"tweets"}});
      p.add_operator({"correlate", tumbling, M::Blocking, correlate_udf, {"alerts", "mentions"}});
      break;
    case WorkloadKind::Lrb:
      p.add_operator({"segments", tumbling, M::NonBlocking, segment_stats_udf, {"reports"}});
      p.add_operator({"accidents", tumbling, M::Blocking, accident_udf, {"reports"}});
      p.add_operator({"tolls", tumbling, M::Blocking, toll_udf, {"segments", "accidents"}});
      break;
  }
  return p;
}

}  // namespace latewin::bench
