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

#include "padgsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>

#include "padgsim/errors.hpp"
#include "padgsim/json_reader.hpp"
#include "padgsim/profiles.hpp"

namespace padg {

namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) {
    return path;
  }
  return (fs::path(base_dir) / p).lexically_normal().string();
}

bool known_strategy(const std::string& name) {
  for (const char* s : kStrategyNames) {
    if (name == s) {
      return true;
    }
  }
  return false;
}

// All-reduce share of step time on PCIe-linked devices, per doubling of tp.
double default_comm_overhead(std::int64_t tp) {
  return tp <= 1 ? 0.0 : 0.2 * std::log2(static_cast<double>(tp));
}

LengthDistribution parse_lengths(ObjectReader& parent, const std::string& key,
                                 const LengthDistribution& fallback) {
  if (!parent.has(key)) {
    parent.optional<bool>(key, false);  // marks null as seen
    return fallback;
  }
  ObjectReader r(parent.raw(key), parent.child(key));
  const double mean = r.required<double>("mean");
  const double median = r.required<double>("median");
  const auto lower = r.optional<std::int64_t>("lower", 1);
  const auto upper = r.optional<std::int64_t>("upper", kMaxSequenceLen);
  r.finish();
  if (!(mean > 0.0) || !(median > 0.0)) {
    throw ValidationError(parent.child(key), "mean and median must be > 0");
  }
  LengthDistribution d = LengthDistribution::fit(mean, median, lower, upper);
  d.validate(parent.child(key));
  return d;
}

void parse_workload(Scenario& sc, ObjectReader& root,
                    const std::string& base_dir) {
  ObjectReader w(root.raw("workload"), "workload");
  const bool has_trace = w.has("trace");
  const bool has_preset = w.has("preset");
  if (has_trace == has_preset) {
    throw ValidationError("workload", "give exactly one of trace and preset");
  }
  if (has_trace) {
    sc.from_trace = true;
    sc.trace_path = resolve(base_dir, w.required<std::string>("trace"));
    sc.preset = w.optional<std::string>("slo_preset", "");
    sc.workload.name = fs::path(sc.trace_path).stem().string();
    w.optional<bool>("preset", false);
  } else {
    sc.preset = w.required<std::string>("preset");
    const DatasetPreset& p = dataset_preset(sc.preset, "workload.preset");
    const double rate = w.optional<double>("rate", 1.0);
    const double duration = w.optional<double>("duration", 600.0);
    sc.workload = WorkloadSpec::from_preset(p, rate, duration, 0);
    sc.workload.input_len_dist =
        parse_lengths(w, "input", sc.workload.input_len_dist);
    sc.workload.output_len_dist =
        parse_lengths(w, "output", sc.workload.output_len_dist);
    if (w.has("ramp")) {
      const auto& ramp = w.raw("ramp");
      if (!ramp.is_array() || ramp.empty()) {
        throw ValidationError("workload.ramp", "expected a non-empty array");
      }
      for (std::size_t i = 0; i < ramp.size(); ++i) {
        ObjectReader step(ramp[i], "workload.ramp[" + std::to_string(i) + "]");
        RateStep s;
        s.start = step.required<double>("at");
        s.rate = step.required<double>("rate");
        step.finish();
        sc.workload.rate_steps.push_back(s);
      }
    } else {
      w.optional<bool>("ramp", false);
    }
    sc.workload.validate("workload");
  }
  w.finish();
}

void parse_strategy(Scenario& sc, ObjectReader& root) {
  ObjectReader s(root.raw("strategy"), "strategy");
  sc.strategy.name = s.optional<std::string>("name", "padg");
  if (!known_strategy(sc.strategy.name)) {
    throw ValidationError("strategy.name",
                          "unknown strategy '" + sc.strategy.name +
                              "' (padg, nodg-separate, nodg-hybrid, fudg)");
  }
  PadgParams& padg = sc.strategy.padg;
  padg.macro_sizes = {sc.instances};
  if (s.has("padg")) {
    ObjectReader p(s.raw("padg"), "strategy.padg");
    if (p.has("macro_sizes")) {
      padg.macro_sizes.clear();
      const auto& sizes = p.raw("macro_sizes");
      if (!sizes.is_array()) {
        throw ValidationError("strategy.padg.macro_sizes", "expected an array");
      }
      int total = 0;
      for (const auto& v : sizes) {
        padg.macro_sizes.push_back(
            ObjectReader::convert<int>(v, "strategy.padg.macro_sizes"));
        total += padg.macro_sizes.back();
      }
      if (total != sc.instances) {
        throw ValidationError("strategy.padg.macro_sizes",
                              "sizes must add up to cluster.instances");
      }
    } else {
      p.optional<bool>("macro_sizes", false);
    }
    padg.status_period = p.optional<double>("status_period", 0.05);
    padg.staleness_bound =
        p.optional<double>("staleness_bound", 4.0 * padg.status_period);
    padg.output_reservation_tokens =
        p.optional<std::int64_t>("output_reservation_tokens", -1);
    const auto check = p.optional<std::string>("tpot_check", "mean");
    if (check == "min") {
      padg.tpot_check = TpotCheck::kMin;
    } else if (check != "mean") {
      throw ValidationError("strategy.padg.tpot_check", "expected mean or min");
    }
    p.finish();
  } else {
    s.optional<bool>("padg", false);
    padg.staleness_bound = 4.0 * padg.status_period;
    padg.output_reservation_tokens = -1;
  }
  if (s.has("nodg-hybrid")) {
    ObjectReader p(s.raw("nodg-hybrid"), "strategy.nodg-hybrid");
    sc.strategy.hybrid.chunk_size = p.optional<std::int64_t>("chunk_size", 256);
    sc.strategy.hybrid.token_budget =
        p.optional<std::int64_t>("token_budget", 512);
    p.finish();
    if (sc.strategy.hybrid.chunk_size > sc.strategy.hybrid.token_budget) {
      throw ValidationError("strategy.nodg-hybrid.chunk_size",
                            "must not exceed token_budget");
    }
  } else {
    s.optional<bool>("nodg-hybrid", false);
  }
  s.optional<bool>("nodg-separate", false);
  FudgTopology& f = sc.strategy.fudg;
  f.prefill_instances = std::max(1, sc.instances / 2);
  f.decode_instances = std::max(1, sc.instances - f.prefill_instances);
  if (s.has("fudg")) {
    ObjectReader p(s.raw("fudg"), "strategy.fudg");
    if (p.has("prefill_instances")) {
      f.prefill_instances = p.required<int>("prefill_instances");
      f.decode_instances = sc.instances - f.prefill_instances;
      sc.strategy.fudg_split_given = true;
    } else {
      p.optional<bool>("prefill_instances", false);
    }
    f.link_bandwidth = p.optional<double>("link_bandwidth", 1.25e9);
    f.hops = p.optional<int>("hops", 1);
    f.latency = p.optional<double>("latency", 0.0);
    p.finish();
  } else {
    s.optional<bool>("fudg", false);
  }
  if (sc.strategy.name == "fudg") {
    if (sc.instances < 2) {
      throw ValidationError("cluster.instances", "fudg needs >= 2 instances");
    }
    f.validate("strategy.fudg");
  }
  s.finish();
}

void parse_scaling(Scenario& sc, ObjectReader& root) {
  if (root.has("scaling")) {
    ObjectReader r(root.raw("scaling"), "scaling");
    ScalingPolicy p;
    p.n_lower = r.optional<int>("n_lower", p.n_lower);
    p.n_upper = r.optional<int>("n_upper", p.n_upper);
    p.attainment_window =
        r.optional<double>("attainment_window", p.attainment_window);
    p.attainment_target =
        r.optional<double>("attainment_target", p.attainment_target);
    p.utilization_threshold =
        r.optional<double>("utilization_threshold", p.utilization_threshold);
    p.utilization_sustain =
        r.optional<double>("utilization_sustain", p.utilization_sustain);
    p.check_period = r.optional<double>("check_period", p.check_period);
    p.cooldown = r.optional<double>("cooldown", p.cooldown);
    p.migration_overhead =
        r.optional<double>("migration_overhead", p.migration_overhead);
    p.reinit_cost = r.optional<double>("reinit_cost", p.reinit_cost);
    p.warmup = r.optional<double>("warmup", p.warmup);
    p.max_instances = r.optional<int>("max_instances", p.max_instances);
    p.min_instances = r.optional<int>("min_instances", p.min_instances);
    if (r.has("script")) {
      const auto& script = r.raw("script");
      if (!script.is_array()) {
        throw ValidationError("scaling.script", "expected an array");
      }
      for (std::size_t i = 0; i < script.size(); ++i) {
        const std::string path = "scaling.script[" + std::to_string(i) + "]";
        ObjectReader e(script[i], path);
        ScriptedScale s;
        s.at = e.required<double>("at");
        const auto dir = e.required<std::string>("direction");
        if (dir == "expand") {
          s.direction = ScaleDirection::kExpand;
        } else if (dir == "contract") {
          s.direction = ScaleDirection::kContract;
        } else {
          throw ValidationError(path + ".direction",
                                "expected expand or contract");
        }
        e.finish();
        sc.scaling_script.push_back(s);
      }
    } else {
      r.optional<bool>("script", false);
    }
    const bool automatic = r.optional<bool>("automatic", true);
    r.finish();
    p.validate("scaling");
    if (!automatic) {
      // Script only: periodic checks never fire.
      p.check_period = std::numeric_limits<double>::infinity();
    }
    sc.scaling = p;
  } else {
    root.optional<bool>("scaling", false);
  }
}

std::vector<double> number_list(const nlohmann::json& v,
                                const std::string& path) {
  if (!v.is_array()) {
    throw ValidationError(path, "expected an array");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    out.push_back(ObjectReader::convert<double>(x, path));
  }
  return out;
}

void parse_sweep(Scenario& sc, ObjectReader& root) {
  if (!root.has("sweep")) {
    root.optional<bool>("sweep", false);
    sc.sweep.strategies = {sc.strategy.name};
    return;
  }
  ObjectReader r(root.raw("sweep"), "sweep");
  if (r.has("strategies")) {
    const auto& list = r.raw("strategies");
    if (!list.is_array() || list.empty()) {
      throw ValidationError("sweep.strategies", "expected a non-empty array");
    }
    for (const auto& v : list) {
      const auto name =
          ObjectReader::convert<std::string>(v, "sweep.strategies");
      if (!known_strategy(name)) {
        throw ValidationError("sweep.strategies",
                              "unknown strategy '" + name + "'");
      }
      sc.sweep.strategies.push_back(name);
    }
  } else {
    r.optional<bool>("strategies", false);
    sc.sweep.strategies = {sc.strategy.name};
  }
  sc.sweep.rates = number_list(r.raw("rates"), "sweep.rates");
  if (sc.sweep.rates.empty()) {
    throw ValidationError("sweep.rates", "must not be empty");
  }
  for (std::size_t i = 0; i < sc.sweep.rates.size(); ++i) {
    if (!(sc.sweep.rates[i] > 0.0) ||
        (i > 0 && sc.sweep.rates[i] <= sc.sweep.rates[i - 1])) {
      throw ValidationError("sweep.rates", "must be positive and ascending");
    }
  }
  if (r.has("percentiles")) {
    sc.sweep.percentiles =
        number_list(r.raw("percentiles"), "sweep.percentiles");
    for (double p : sc.sweep.percentiles) {
      if (!(p > 0.0 && p <= 1.0)) {
        throw ValidationError("sweep.percentiles", "must be in (0, 1]");
      }
    }
  } else {
    r.optional<bool>("percentiles", false);
  }
  sc.sweep.scan_all = r.optional<bool>("scan_all", false);
  r.finish();
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& doc,
                        const std::string& base_dir) {
  ObjectReader root(doc, "");
  Scenario sc;
  sc.name = root.optional<std::string>("name", "scenario");

  ProfileSet loaded;
  const ProfileSet* profiles = &bundled_profiles();
  if (root.has("profiles")) {
    loaded = load_profiles(
        resolve(base_dir, root.required<std::string>("profiles")));
    profiles = &loaded;
  } else {
    root.optional<bool>("profiles", false);
  }
  sc.model_name = root.required<std::string>("model");
  sc.device_name = root.required<std::string>("device");
  const ModelProfile& model = profiles->model(sc.model_name, "model");
  profiles->device(sc.device_name, "device");
  const Calibration* cal = profiles->calibration(sc.model_name, sc.device_name);

  InstanceConfig& ic = sc.instance;
  ic.model = model;
  ic.device = profiles->calibrated_device(sc.model_name, sc.device_name);
  double memory_utilization = 0.9;
  std::optional<double> kv_capacity;
  const std::int64_t default_tp = cal ? cal->tp_degree : 1;
  if (root.has("instance")) {
    ObjectReader r(root.raw("instance"), "instance");
    ic.tp_degree = r.optional<std::int64_t>("tp_degree", default_tp);
    ic.comm_overhead_fraction = r.optional<double>(
        "comm_overhead_fraction", cal && cal->tp_degree == ic.tp_degree
                                      ? cal->comm_overhead_fraction
                                      : default_comm_overhead(ic.tp_degree));
    if (r.has("kv_capacity_bytes")) {
      kv_capacity = r.required<double>("kv_capacity_bytes");
    } else {
      r.optional<bool>("kv_capacity_bytes", false);
    }
    memory_utilization = r.optional<double>("memory_utilization", 0.9);
    ic.switch_overhead = r.optional<double>("switch_overhead", 0.0);
    ic.per_layer_overhead = r.optional<double>("per_layer_overhead", 0.0);
    ic.per_chunk_overhead = r.optional<double>("per_chunk_overhead", 0.0);
    r.finish();
  } else {
    root.optional<bool>("instance", false);
    ic.tp_degree = default_tp;
    ic.comm_overhead_fraction =
        cal ? cal->comm_overhead_fraction : default_comm_overhead(default_tp);
  }
  if (!(memory_utilization > 0.0 && memory_utilization <= 1.0)) {
    throw ValidationError("instance.memory_utilization", "must be in (0, 1]");
  }
  ic.device_count = ic.tp_degree;
  ic.kv_capacity_bytes =
      kv_capacity ? *kv_capacity
                  : default_kv_capacity(ic.model, ic.device, ic.device_count,
                                        memory_utilization);
  ic.validate("instance");

  {
    ObjectReader r(root.raw("cluster"), "cluster");
    sc.instances = r.required<int>("instances");
    r.finish();
    if (sc.instances < 1) {
      throw ValidationError("cluster.instances", "must be >= 1");
    }
  }

  parse_workload(sc, root, base_dir);
  if (root.has("slo")) {
    ObjectReader r(root.raw("slo"), "slo");
    sc.slo.ttft = r.required<double>("ttft");
    sc.slo.tpot = r.required<double>("tpot");
    r.finish();
  } else {
    root.optional<bool>("slo", false);
    if (sc.preset.empty()) {
      throw ValidationError("slo", "required when the workload has no preset");
    }
    sc.slo = dataset_preset(sc.preset).slo;
  }
  sc.slo.validate("slo");

  parse_strategy(sc, root);
  parse_scaling(sc, root);
  sc.seed = root.optional<std::uint64_t>("seed", 0);
  if (root.has("horizon")) {
    sc.horizon = root.required<double>("horizon");
    if (!(*sc.horizon > 0.0)) {
      throw ValidationError("horizon", "must be > 0");
    }
  } else {
    root.optional<bool>("horizon", false);
  }
  if (root.has("engine")) {
    ObjectReader r(root.raw("engine"), "engine");
    sc.engine.max_prefill_batch_tokens =
        r.optional<std::int64_t>("max_prefill_batch_tokens", 4096);
    sc.engine.check_invariants = r.optional<bool>("check_invariants", false);
    r.finish();
    if (sc.engine.max_prefill_batch_tokens < 1) {
      throw ValidationError("engine.max_prefill_batch_tokens", "must be >= 1");
    }
  } else {
    root.optional<bool>("engine", false);
  }
  parse_sweep(sc, root);
  root.finish();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("config", "cannot open " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config", e.what());
  }
  return parse_scenario(doc, fs::path(path).parent_path().string().empty()
                                 ? "."
                                 : fs::path(path).parent_path().string());
}

std::vector<Request> build_workload(const Scenario& sc,
                                    const RunOverrides& overrides) {
  std::vector<Request> reqs;
  if (sc.from_trace) {
    reqs = load_trace(sc.trace_path);
  } else {
    WorkloadSpec spec = sc.workload;
    spec.seed = overrides.seed.value_or(sc.seed);
    if (overrides.rate) {
      spec.request_rate = *overrides.rate;
      spec.rate_steps.clear();
    }
    reqs = generate(spec);
  }
  if (reqs.empty()) {
    throw EmptyInput("workload produced no requests");
  }
  return reqs;
}

namespace {

std::int64_t default_reservation(const Scenario& sc,
                                 const std::vector<Request>& reqs) {
  if (!sc.preset.empty()) {
    return std::llround(dataset_preset(sc.preset).output_mean);
  }
  double sum = 0.0;
  for (const Request& r : reqs) {
    sum += static_cast<double>(r.output_len);
  }
  return std::llround(sum / static_cast<double>(reqs.size()));
}

}  // namespace

RunOutput run_scenario(const Scenario& sc, const RunOverrides& overrides) {
  RunOutput out;
  out.requests = build_workload(sc, overrides);
  out.strategy = overrides.strategy.value_or(sc.strategy.name);
  if (!known_strategy(out.strategy)) {
    throw ValidationError("strategy.name",
                          "unknown strategy '" + out.strategy + "'");
  }

  EngineOptions opts = sc.engine;
  opts.check_invariants = opts.check_invariants || overrides.check_invariants;
  const double span = out.requests.back().arrival_time;
  const double duration =
      sc.from_trace ? span : std::max(sc.workload.duration, span);
  out.horizon = sc.horizon.value_or(3.0 * duration + 60.0);
  opts.horizon = out.horizon;
  opts.chunk_size = sc.strategy.hybrid.chunk_size;
  opts.token_budget = sc.strategy.hybrid.token_budget;

  std::unique_ptr<Strategy> strategy;
  PadgStrategy* padg = nullptr;
  NodgStrategy* nodg = nullptr;
  FudgStrategy* fudg = nullptr;
  if (out.strategy == "padg") {
    PadgParams p = sc.strategy.padg;
    if (p.output_reservation_tokens < 0) {
      p.output_reservation_tokens = default_reservation(sc, out.requests);
    }
    p.record_routing = overrides.record_routing;
    auto s = std::make_unique<PadgStrategy>(sc.instance, sc.slo, p, sc.scaling,
                                            sc.scaling_script);
    padg = s.get();
    strategy = std::move(s);
  } else if (out.strategy == "fudg") {
    FudgTopology topo = sc.strategy.fudg;
    if (overrides.fudg_prefill_instances) {
      topo.prefill_instances = *overrides.fudg_prefill_instances;
      topo.decode_instances = sc.instances - topo.prefill_instances;
    }
    if (sc.instances < 2) {
      throw ValidationError("cluster.instances", "fudg needs >= 2 instances");
    }
    auto s = std::make_unique<FudgStrategy>(sc.instance, topo,
                                            overrides.record_routing);
    fudg = s.get();
    strategy = std::move(s);
  } else {
    const InstanceMode mode = out.strategy == "nodg-hybrid"
                                  ? InstanceMode::kHybrid
                                  : InstanceMode::kSeparate;
    auto s = std::make_unique<NodgStrategy>(sc.instance, sc.instances, mode,
                                            overrides.record_routing);
    nodg = s.get();
    strategy = std::move(s);
  }

  Simulator sim(out.requests, opts, *strategy);
  if (overrides.observer) {
    sim.set_observer(overrides.observer);
  }
  out.result = sim.run();
  if (padg) {
    out.routing = padg->routing_log();
    out.scaling = padg->scaling_log();
    out.migrations = padg->migrations();
  } else if (nodg) {
    out.routing = nodg->routing_log();
  } else if (fudg) {
    out.routing = fudg->routing_log();
    out.transferred_bytes = fudg->transferred_bytes();
    out.link_bytes = fudg->link_bytes();
    out.max_transfers_in_flight = fudg->max_transfers_in_flight();
  }
  return out;
}

std::uint64_t probe_seed(std::uint64_t base, double rate) {
  // splitmix64 over the base seed and the rate in micro-requests/s.
  std::uint64_t z =
      base ^ (static_cast<std::uint64_t>(std::llround(rate * 1e6)) *
              0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<SweepCell> run_sweep(const Scenario& sc) {
  if (sc.sweep.rates.empty()) {
    throw ValidationError("sweep.rates", "must not be empty");
  }
  std::vector<SweepCell> cells;
  for (const std::string& name : sc.sweep.strategies) {
    std::vector<int> splits{0};
    if (name == "fudg") {
      if (sc.instances < 2) {
        throw ValidationError("cluster.instances", "fudg needs >= 2 instances");
      }
      splits.clear();
      if (sc.strategy.fudg_split_given) {
        splits.push_back(sc.strategy.fudg.prefill_instances);
      } else {
        for (int p = 1; p < sc.instances; ++p) {
          splits.push_back(p);
        }
      }
    }
    for (double pct : sc.sweep.percentiles) {
      SweepCell best;
      best.strategy = name;
      best.percentile = pct;
      for (int split : splits) {
        RateProbe probe = [&](double rate) {
          RunOverrides o;
          o.rate = rate;
          o.strategy = name;
          o.seed = probe_seed(sc.seed, rate);
          o.record_routing = false;
          if (split > 0) {
            o.fudg_prefill_instances = split;
          }
          const RunOutput run = run_scenario(sc, o);
          const Attainment a = attainment(run.result.records, sc.slo);
          double out_tokens = 0.0;
          for (const Request& r : run.requests) {
            out_tokens += static_cast<double>(r.output_len);
          }
          return ProbeResult{
              a.fraction, a.unfinished,
              out_tokens / static_cast<double>(run.requests.size())};
        };
        SweepCell cell;
        cell.strategy = name;
        cell.percentile = pct;
        cell.prefill_instances = split;
        try {
          cell.goodput =
              goodput_grid(sc.sweep.rates, pct, probe, sc.sweep.scan_all);
          cell.feasible = true;
        } catch (const NoFeasibleRate&) {
          cell.feasible = false;
        }
        if (!best.feasible ||
            (cell.feasible && cell.goodput.rate > best.goodput.rate)) {
          if (cell.feasible || best.prefill_instances == 0) {
            best = cell;
          }
        }
      }
      cells.push_back(best);
    }
  }
  return cells;
}

void write_summary_csv(std::ostream& out, const Scenario& sc,
                       const RunOutput& run, bool header) {
  if (header) {
    out << "scenario,strategy,rate,requests,attainment,meets_p50,meets_p90,"
           "meets_p99,unfinished,preemptions\n";
  }
  const Attainment a = attainment(run.result.records, sc.slo);
  const double rate = sc.from_trace
                          ? static_cast<double>(run.requests.size()) /
                                std::max(run.requests.back().arrival_time, 1e-9)
                          : sc.workload.request_rate;
  out << sc.name << ',' << run.strategy << ',' << format_double(rate) << ','
      << a.total << ',' << format_double(a.fraction) << ','
      << (a.meets(0.5) ? 1 : 0) << ',' << (a.meets(0.9) ? 1 : 0) << ','
      << (a.meets(0.99) ? 1 : 0) << ',' << a.unfinished << ','
      << run.result.preemptions << '\n';
}

void write_sweep_csv(std::ostream& out, const Scenario& sc,
                     const std::vector<SweepCell>& cells) {
  out << "scenario,strategy,percentile,goodput_rps,goodput_tokens_per_s,"
         "prefill_instances,probes,non_monotone\n";
  for (const SweepCell& c : cells) {
    out << sc.name << ',' << c.strategy << ',' << format_double(c.percentile)
        << ',' << (c.feasible ? format_double(c.goodput.rate) : "0") << ','
        << (c.feasible ? format_double(c.goodput.tokens_per_s) : "0") << ','
        << c.prefill_instances << ',' << c.goodput.probes.size() << ','
        << (c.goodput.non_monotone ? 1 : 0) << '\n';
  }
}

void write_scaling_csv(std::ostream& out,
                       const std::vector<ScalingLogEntry>& log) {
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      s += (i ? "|" : "") + std::to_string(v[i]);
    }
    return s;
  };
  out << "time,action,sizes_before,sizes_after,reason\n";
  for (const ScalingLogEntry& e : log) {
    out << format_double(e.time) << ',' << to_string(e.kind) << ','
        << join(e.sizes_before) << ',' << join(e.sizes_after) << ',' << e.reason
        << '\n';
  }
}

}  // namespace padg
