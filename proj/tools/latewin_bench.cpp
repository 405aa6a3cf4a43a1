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

// Benchmark driver: workload runs and the trigger study.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "latewin/bench/runner.hpp"

using namespace latewin;
using namespace latewin::bench;

namespace {

struct RunOptions {
  std::string workload = "average";
  std::string backend = "aion";
  int past_windows = 1;
  std::uint64_t seed = 42;
  std::string profile = "desk";
  std::string state_root = "latewin-state";
  double io_latency_ms = 0;
  std::string out = "out";
  std::string config_file;
  std::string policy;
  std::optional<double> rho_min, mu_moderate, mu_critical;
  std::optional<TimeMs> tau_ms, static_lateness_ms;
  std::string selection_rule;
  std::string trigger;
  std::optional<double> trigger_bound;
  std::optional<std::size_t> grid_bins;
  std::optional<int> run_watermarks, warmup_watermarks;
  double time_scale = 0;
  double memory_budget_mb = 256;
  std::optional<std::size_t> serialization_workers, mbucket_capacity, block_capacity, prestage_depth;
  std::int64_t codec_cost_ns = 0;
  bool no_prestage = false;
  bool stop_on_oom = false;
};

int run(const RunOptions& o) {
  BenchConfig cfg;
  cfg.workload = WorkloadSpec::defaults(workload_by_name(o.workload), profile_by_name(o.profile));
  cfg.workload.past_windows = o.past_windows;
  if (o.run_watermarks) cfg.workload.run_watermarks = *o.run_watermarks;
  if (o.warmup_watermarks) cfg.workload.warmup_watermarks = *o.warmup_watermarks;

  EngineConfig& e = cfg.engine;
  e = bench_engine_defaults();
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw std::runtime_error("cannot read " + o.config_file);
    e = EngineConfig::parse(in);
  }
  e.backend = backend_by_name(o.backend);
  e.state_root = o.state_root;
  e.io_latency_per_block = std::chrono::microseconds(static_cast<std::int64_t>(o.io_latency_ms * 1000.0));
  e.memory_budget_bytes = static_cast<std::int64_t>(o.memory_budget_mb * 1024 * 1024);
  e.codec_cost_per_event = std::chrono::nanoseconds(o.codec_cost_ns);
  e.prestage = !o.no_prestage;
  if (!o.policy.empty()) e.policy.kind = policy_by_name(o.policy);
  if (o.rho_min) e.policy.rho_min = *o.rho_min;
  if (o.tau_ms) e.policy.tau_ms = *o.tau_ms;
  if (o.mu_moderate) e.policy.mu_moderate = *o.mu_moderate;
  if (o.mu_critical) e.policy.mu_critical = *o.mu_critical;
  if (!o.selection_rule.empty()) e.policy.selection_rule = selection_rule_by_name(o.selection_rule);
  if (!o.trigger.empty()) e.set("trigger.mode", o.trigger);
  if (o.trigger_bound) e.trigger.bound = *o.trigger_bound;
  if (o.grid_bins) e.trigger.grid_bins = *o.grid_bins;
  if (o.static_lateness_ms) e.lateness.static_ms = *o.static_lateness_ms;
  if (o.serialization_workers) e.serialization_workers = *o.serialization_workers;
  if (o.mbucket_capacity) e.mbucket_capacity = *o.mbucket_capacity;
  if (o.block_capacity) e.block_capacity = *o.block_capacity;
  if (o.prestage_depth) e.prestage_depth = *o.prestage_depth;
  e.validate();

  cfg.seed = o.seed;
  cfg.time_scale = o.time_scale;
  cfg.out_dir = o.out;
  cfg.stop_on_oom = o.stop_on_oom;

  const MetricsReport r = run_benchmark(cfg);
  std::printf("workload=%s backend=%s past_windows=%d median_state_bytes=%.0f peak_state_bytes=%lld oom=%d "
              "ingestion_rate_normal=%.1f ingestion_rate_all=%.1f reexecutions=%zu reexec_rate_median=%.1f "
              "dropped_beyond_bound=%llu wall_s=%.1f\n",
              o.workload.c_str(), o.backend.c_str(), o.past_windows, r.median_state_bytes,
              static_cast<long long>(r.peak_state_bytes), r.oom ? 1 : 0, r.ingestion_rate_normal,
              r.ingestion_rate_all, r.reexecutions, r.reexec_processing_rate,
              static_cast<unsigned long long>(r.counters.dropped_beyond_bound), r.wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latewin benchmark driver"};
  app.require_subcommand(1);

  RunOptions o;
  auto* run_cmd = app.add_subcommand("run", "run a workload benchmark");
  run_cmd->add_option("--workload", o.workload, "average | bigrams | stockmarket | lrb")->capture_default_str();
  run_cmd->add_option("--backend", o.backend, "aion | memory")->capture_default_str();
  run_cmd->add_option("--past-windows", o.past_windows, "late events reach back this many windows")->capture_default_str();
  run_cmd->add_option("--seed", o.seed)->capture_default_str();
  run_cmd->add_option("--profile", o.profile, "desk | full")->capture_default_str();
  run_cmd->add_option("--state-root", o.state_root, "directory for window files")->capture_default_str();
  run_cmd->add_option("--inject-io-latency-ms", o.io_latency_ms, "sleep per block read or written")->capture_default_str();
  run_cmd->add_option("--out", o.out, "CSV output directory")->capture_default_str();
  run_cmd->add_option("--config", o.config_file, "engine config file (key = value)");
  run_cmd->add_option("--policy", o.policy, "standard | local | global");
  run_cmd->add_option("--rho-min", o.rho_min);
  run_cmd->add_option("--tau-ms", o.tau_ms);
  run_cmd->add_option("--mu-moderate", o.mu_moderate);
  run_cmd->add_option("--mu-critical", o.mu_critical);
  run_cmd->add_option("--selection-rule", o.selection_rule, "size_desc | ingestion_asc");
  run_cmd->add_option("--trigger", o.trigger, "staleness | standard");
  run_cmd->add_option("--trigger-bound", o.trigger_bound, "staleness bound");
  run_cmd->add_option("--grid-bins", o.grid_bins);
  run_cmd->add_option("--static-lateness-ms", o.static_lateness_ms, "fixed allowed lateness instead of the predictive bound");
  run_cmd->add_option("--run-watermarks", o.run_watermarks);
  run_cmd->add_option("--warmup-watermarks", o.warmup_watermarks);
  run_cmd->add_option("--time-scale", o.time_scale, "processing ms per wall ms; 0 = unpaced")->capture_default_str();
  run_cmd->add_option("--memory-budget-mb", o.memory_budget_mb)->capture_default_str();
  run_cmd->add_option("--serialization-workers", o.serialization_workers);
  run_cmd->add_option("--codec-cost-ns", o.codec_cost_ns, "emulated codec cost per event")->capture_default_str();
  run_cmd->add_option("--mbucket-capacity", o.mbucket_capacity);
  run_cmd->add_option("--block-capacity", o.block_capacity);
  run_cmd->add_option("--prestage-depth", o.prestage_depth);
  run_cmd->add_flag("--no-prestage", o.no_prestage);
  run_cmd->add_flag("--stop-on-oom", o.stop_on_oom);

  TriggerStudyConfig ts;
  std::string ts_out = "out";
  std::vector<std::string> triggers;
  auto* study_cmd = app.add_subcommand("trigger-study", "staleness of the triggers on synthetic arrival models");
  study_cmd->add_option("--trigger", triggers, "aion | deltat | deltaev (repeatable)");
  study_cmd->add_option("--distribution", ts.distributions, "lnorm | unif | norm | bursts (repeatable)");
  study_cmd->add_option("--bound", ts.bounds, "staleness bounds (repeatable)");
  study_cmd->add_option("--k", ts.max_k, "largest number of executions")->capture_default_str();
  study_cmd->add_option("--grid-bins", ts.grid_bins)->capture_default_str();
  study_cmd->add_option("--out", ts_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(o);
    if (!triggers.empty()) {
      ts.triggers.clear();
      for (const auto& t : triggers) ts.triggers.push_back(trigger_by_name(t));
    }
    ts.out_dir = ts_out;
    const TriggerStudy study = run_trigger_study(ts);
    for (const auto& b : study.bounds)
      std::printf("%s %s bound=%g executions=%s\n", b.distribution.c_str(), std::string(to_string(b.trigger)).c_str(),
                  b.bound, b.executions ? std::to_string(*b.executions).c_str() : "none");
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
