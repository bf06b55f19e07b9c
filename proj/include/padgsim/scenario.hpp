/* Copyright 2026 The padgsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padgsim/baselines.hpp"
#include "padgsim/engine.hpp"
#include "padgsim/metrics.hpp"
#include "padgsim/mitosis.hpp"
#include "padgsim/padg_scheduler.hpp"
#include "padgsim/workload.hpp"

namespace padg {

inline constexpr const char* kStrategyNames[] = {"padg", "nodg-separate",
                                                 "nodg-hybrid", "fudg"};

struct HybridParams {
  std::int64_t chunk_size = 256;
  std::int64_t token_budget = 512;
};

// Per-strategy parameter blocks; `name` selects the one that runs.
struct StrategySpec {
  std::string name = "padg";
  PadgParams padg;
  HybridParams hybrid;
  FudgTopology fudg;
  bool fudg_split_given = false;
};

struct SweepSpec {
  std::vector<std::string> strategies;
  std::vector<double> rates;
  std::vector<double> percentiles{0.5, 0.9, 0.99};
  bool scan_all = false;
};

struct Scenario {
  std::string name = "scenario";
  std::string model_name;
  std::string device_name;
  InstanceConfig instance;
  int instances = 1;

  // Exactly one of preset-driven generation and trace replay.
  bool from_trace = false;
  std::string trace_path;
  std::string preset;
  WorkloadSpec workload;

  SloConfig slo;
  StrategySpec strategy;
  std::optional<ScalingPolicy> scaling;
  std::vector<ScriptedScale> scaling_script;
  std::uint64_t seed = 0;
  std::optional<double> horizon;
  EngineOptions engine;
  SweepSpec sweep;
};

// Throws ValidationError naming the offending field. Relative trace and
// profile paths resolve against `base_dir`.
Scenario parse_scenario(const nlohmann::json& doc,
                        const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunOverrides {
  std::optional<double> rate;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<int> fudg_prefill_instances;
  bool check_invariants = false;
  bool record_routing = true;
  EventObserver observer;
};

struct RunOutput {
  std::string strategy;
  SimulationResult result;
  std::vector<Request> requests;
  std::vector<RoutingLogEntry> routing;
  std::vector<ScalingLogEntry> scaling;
  std::vector<MigrationRecord> migrations;
  // FuDG only.
  double transferred_bytes = 0.0;
  double link_bytes = 0.0;
  std::size_t max_transfers_in_flight = 0;
  double horizon = 0.0;
};

std::vector<Request> build_workload(const Scenario& sc,
                                    const RunOverrides& overrides = {});
RunOutput run_scenario(const Scenario& sc, const RunOverrides& overrides = {});

// Seed for one goodput probe, a pure function of the base seed and rate.
std::uint64_t probe_seed(std::uint64_t base, double rate);

struct SweepCell {
  std::string strategy;
  double percentile = 0.0;
  bool feasible = false;
  GoodputResult goodput;
  int prefill_instances = 0;  // FuDG split that won
};

std::vector<SweepCell> run_sweep(const Scenario& sc);

// scenario,strategy,rate,requests,attainment,meets_p50,meets_p90,meets_p99,
// unfinished,preemptions
void write_summary_csv(std::ostream& out, const Scenario& sc,
                       const RunOutput& run, bool header = true);
// scenario,strategy,percentile,goodput_rps,goodput_tokens_per_s,
// prefill_instances,probes,non_monotone
void write_sweep_csv(std::ostream& out, const Scenario& sc,
                     const std::vector<SweepCell>& cells);
// time,action,sizes_before,sizes_after,reason
void write_scaling_csv(std::ostream& out,
                       const std::vector<ScalingLogEntry>& log);

}  // namespace padg
