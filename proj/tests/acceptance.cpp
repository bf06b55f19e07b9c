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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `acceptance 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alg2_oracle.hpp"
#include "padgsim/baselines.hpp"
#include "padgsim/core_model.hpp"
#include "padgsim/errors.hpp"
#include "padgsim/metrics.hpp"
#include "padgsim/mitosis.hpp"
#include "padgsim/padg_scheduler.hpp"
#include "padgsim/profiles.hpp"
#include "padgsim/scenario.hpp"

namespace {

using nlohmann::json;
using padg::format_double;

constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// --- 1, 2: memory arithmetic
// --------------------------------------------------

Outcome bandwidth_oracle() {
  const padg::ProfileSet& p = padg::bundled_profiles();
  struct Row {
    const char* model;
    double rate;
    double gib;
  };
  const Row rows[] = {{"llama-30b", 6584.6, 9.796},
                      {"llama-30b", 26189.2, 38.96},
                      {"codellama-34b", 6838.92, 1.25},
                      {"codellama-34b", 25978.88, 4.76}};
  double worst = 0.0;
  for (const Row& r : rows) {
    const double got =
        padg::required_kv_bandwidth(p.model(r.model), r.rate) / kGiB;
    worst = std::max(worst, std::abs(got - r.gib) / r.gib);
  }
  return {worst <= 0.01, "max relative error " + fmt(100 * worst, 3) + "%"};
}

Outcome kv_sizing() {
  const padg::ModelProfile& m = padg::bundled_profiles().model("llama-30b");
  const double per_token = padg::kv_bytes_per_token(m);
  const double batch_gib = 128.0 * 300.0 * per_token / kGiB;
  const double err = std::abs(batch_gib - 58.4) / 58.4;
  return {per_token == 1597440.0 && err <= 0.05,
          format_double(per_token) + " B/token, 128x300 tokens = " +
              fmt(batch_gib) + " GiB (" + fmt(100 * err, 3) + "% from 58.4)"};
}

// --- 3: admission check against the oracle ----------------------------------

Outcome admission_oracle() {
  const padg::InstanceConfig cfg =
      padg::bundled_profiles().calibration_instance(
          *padg::bundled_profiles().calibration("llama-30b", "l20"));
  const padg::PrefillPredictor predict = [&](std::int64_t n) {
    return padg::prefill_time(cfg, n);
  };
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> len(1, 4096);
  const int cases = 5000;
  int mismatches = 0;
  int fail_counts[3] = {0, 0, 0};
  for (int i = 0; i < cases; ++i) {
    const double now = 1000.0 * u(rng);
    padg::InstanceStatus s;
    s.instance = 0;
    s.snapshot_time = now;
    s.phase = u(rng) < 0.5
                  ? padg::Phase::kPrefill
                  : (u(rng) < 0.5 ? padg::Phase::kDecode : padg::Phase::kIdle);
    s.t_switch = now - 3.0 * u(rng);
    s.kv_capacity = 40e9;
    s.kv_used = 40e9 * u(rng);
    const int n = static_cast<int>(12 * u(rng));
    for (int k = 0; k < n; ++k) {
      padg::StatusRequest q;
      q.id = k;
      q.routed_time = now - 20.0 * u(rng) * u(rng);
      q.input_len = len(rng);
      if (u(rng) < 0.7) {
        q.first_token_time = q.routed_time + (now - q.routed_time) * u(rng);
        q.tokens_generated = static_cast<std::int64_t>(
            (now - q.first_token_time) / 0.05 * u(rng));
      }
      s.requests.push_back(q);
    }
    padg::AdmissionParams params;
    params.kv_bytes_per_token = padg::kv_bytes_per_token(cfg.model);
    params.output_reservation_tokens = static_cast<std::int64_t>(400 * u(rng));
    params.staleness_bound = 1.0;
    params.tpot_check = i % 2 ? padg::TpotCheck::kMin : padg::TpotCheck::kMean;
    padg::SloConfig slo;
    slo.ttft = 0.5 + 5.0 * u(rng);
    slo.tpot = 0.05 + 0.1 * u(rng);
    const std::int64_t in = len(rng);
    const auto got = padg::check_constraints(s, in, slo, params, predict, now);
    const auto want =
        padg::testing::alg2_oracle(s, in, slo, params, predict, now);
    if (got.ttft_ok != want.ttft || got.tpot_ok != want.tpot ||
        got.kv_ok != want.kv) {
      ++mismatches;
    }
    fail_counts[0] += !want.ttft;
    fail_counts[1] += !want.tpot;
    fail_counts[2] += !want.kv;
  }
  return {mismatches == 0, std::to_string(cases) + " cases, " +
                               std::to_string(mismatches) +
                               " mismatches (oracle failures ttft/tpot/kv: " +
                               std::to_string(fail_counts[0]) + "/" +
                               std::to_string(fail_counts[1]) + "/" +
                               std::to_string(fail_counts[2]) + ")"};
}

// --- 4: mitosis walk
// ----------------------------------------------------------

std::string sizes_str(std::vector<int> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? "," : "") + std::to_string(v[i]);
  }
  return s + "}";
}

Outcome mitosis_walk() {
  padg::ScalingPolicy p;
  p.n_lower = 3;
  p.n_upper = 6;
  using D = padg::ScaleDirection;
  // Grow past one full macro, fill the larger half, then shrink until the
  // two halves merge.
  const std::vector<D> steps{D::kExpand,   D::kExpand,   D::kExpand,
                             D::kContract, D::kContract, D::kContract,
                             D::kContract};
  const std::vector<std::string> expect{"{6}",   "{4,3}", "{5,3}", "{6,3}",
                                        "{5,3}", "{4,3}", "{3,3}", "{5}"};
  using K = padg::ScalingKind;
  const std::vector<K> expect_kinds{K::kSplit,          K::kAddInstance,
                                    K::kAddInstance,    K::kRemoveInstance,
                                    K::kRemoveInstance, K::kRemoveInstance,
                                    K::kMerge};
  std::vector<int> sizes{6};
  std::vector<std::string> seen{sizes_str(sizes)};
  std::vector<K> kinds;
  for (D d : steps) {
    const padg::ScalingAction a = padg::scale_step(sizes, d, p);
    kinds.push_back(a.kind);
    sizes = padg::apply_action(sizes, a, p);
    seen.push_back(sizes_str(sizes));
  }
  std::string walk;
  for (const auto& s : seen) walk += (walk.empty() ? "" : " -> ") + s;
  const bool kinds_ok = kinds == expect_kinds;
  return {seen == expect && kinds_ok, walk};
}

// --- shared scenarios
// -----------------------------------------------------------

json base_doc(const std::string& preset, int instances, double duration,
              std::uint64_t seed) {
  json d;
  d["name"] = "acceptance-" + preset;
  d["model"] = "llama-30b";
  d["device"] = "l20";
  d["cluster"] = {{"instances", instances}};
  d["workload"] = {{"preset", preset}, {"duration", duration}};
  d["strategy"] = {
      {"name", "padg"},
      {"padg", {{"macro_sizes", {instances}}}},
      {"fudg", {{"link_bandwidth", 1.25e9}, {"hops", 1}}},
  };
  d["seed"] = seed;
  return d;
}

std::vector<double> grid(double step, double hi) {
  std::vector<double> v;
  for (int i = 1; i * step <= hi + 1e-9; ++i) v.push_back(i * step);
  return v;
}

std::map<std::string, padg::SweepCell>& sharegpt_sweep() {
  static std::optional<std::map<std::string, padg::SweepCell>> cache;
  if (!cache) {
    padg::Scenario sc = padg::parse_scenario(base_doc("sharegpt", 4, 600.0, 7));
    sc.sweep.strategies = {"padg", "nodg-separate", "nodg-hybrid", "fudg"};
    sc.sweep.rates = grid(0.125, 8.0);
    sc.sweep.percentiles = {0.9};
    cache.emplace();
    for (padg::SweepCell& c : padg::run_sweep(sc)) {
      (*cache)[c.strategy] = c;
    }
    // Reported alongside, not gated on.
    sc.sweep.strategies = {"padg"};
    sc.strategy.padg.tpot_check = padg::TpotCheck::kMin;
    (*cache)["padg-min"] = padg::run_sweep(sc).front();
  }
  return *cache;
}

std::string goodput_str(const padg::SweepCell& c) {
  return c.feasible ? format_double(c.goodput.rate) : "none";
}

// --- 5: liveness of rolling activation
// ----------------------------------------

Outcome rolling_liveness() {
  const padg::SweepCell& cap = sharegpt_sweep().at("padg");
  if (!cap.feasible) {
    return {false, "PaDG has no feasible P90 rate to take 70% of"};
  }
  const double rate = 0.7 * cap.goodput.rate;
  const padg::Scenario sc =
      padg::parse_scenario(base_doc("sharegpt", 4, 600.0, 11));
  padg::RunOverrides o;
  o.rate = rate;
  const padg::RunOutput run = padg::run_scenario(sc, o);

  std::size_t admitted = 0, ttft_violations = 0, waited = 0;
  for (const padg::RequestRecord& r : run.result.records) {
    if (r.routed_time != r.arrival_time) {
      ++waited;
      continue;
    }
    ++admitted;
    if (!padg::request_metrics(r, sc.slo).ttft_ok) ++ttft_violations;
  }

  // Replay: every decision starts at the last routed instance and moves
  // only past instances that failed a constraint.
  std::size_t bad_moves = 0, moves = 0;
  std::optional<padg::InstanceId> prev;
  for (const padg::RoutingLogEntry& e : run.routing) {
    if (e.probes.empty()) {
      ++bad_moves;
      continue;
    }
    if (prev && e.probes.front().instance != *prev) ++bad_moves;
    const std::size_t last = e.probes.size() - 1;
    for (std::size_t i = 0; i < e.probes.size(); ++i) {
      const bool routed_here = e.instance != padg::kNoInstance && i == last;
      if (e.probes[i].ok() != routed_here) ++bad_moves;
    }
    if (e.instance != padg::kNoInstance) {
      if (e.probes[last].instance != e.instance) ++bad_moves;
      if (prev && e.instance != *prev) ++moves;
      prev = e.instance;
    }
  }
  return {admitted > 0 && ttft_violations == 0 && bad_moves == 0 &&
              run.result.quiescent,
          "rate " + fmt(rate) + " req/s (70% of " +
              format_double(cap.goodput.rate) + "), " +
              std::to_string(admitted) + " admitted at arrival, " +
              std::to_string(ttft_violations) + " TTFT violations, " +
              std::to_string(waited) + " waited in queue, " +
              std::to_string(moves) + " instance moves, " +
              std::to_string(bad_moves) + " replay errors"};
}

// --- 6: strategy ordering
// ------------------------------------------------------

Outcome strategy_ordering() {
  auto& cells = sharegpt_sweep();
  const padg::SweepCell& pd = cells.at("padg");
  const padg::SweepCell& sep = cells.at("nodg-separate");
  const padg::SweepCell& hyb = cells.at("nodg-hybrid");
  const padg::SweepCell& fu = cells.at("fudg");
  auto beats = [](const padg::SweepCell& a, const padg::SweepCell& b) {
    return a.feasible && (!b.feasible || a.goodput.rate > b.goodput.rate);
  };
  const bool over_sep = beats(pd, sep);
  const bool over_fudg = beats(pd, fu);

  std::string lb;
  bool fudg_fails = true;
  for (int hops : {1, 2}) {
    json d = base_doc("longbench", 4, 600.0, 7);
    d["strategy"]["name"] = "fudg";
    d["strategy"]["fudg"]["hops"] = hops;
    padg::Scenario sc = padg::parse_scenario(d);
    sc.sweep.strategies = {"fudg"};
    sc.sweep.rates = grid(0.1, 1.0);
    sc.sweep.percentiles = {0.9};
    const padg::SweepCell c = padg::run_sweep(sc).front();
    fudg_fails = fudg_fails && !c.feasible;
    lb += " " + std::to_string(hops) + "-hop " +
          (c.feasible ? "reaches P90 at " + format_double(c.goodput.rate) +
                            " (" + std::to_string(c.prefill_instances) + "P)"
                      : std::string("never reaches P90"));
    lb += ";";
  }
  lb.pop_back();
  return {over_sep && over_fudg && fudg_fails,
          "ShareGPT P90 goodput padg " + goodput_str(pd) + " (min TPOT check " +
              goodput_str(cells.at("padg-min")) + "), nodg-separate " +
              goodput_str(sep) + ", nodg-hybrid " + goodput_str(hyb) +
              ", fudg " + goodput_str(fu) + " (" +
              std::to_string(fu.prefill_instances) +
              "P); LongBench fudg:" + lb};
}

// --- 7: scaling recovery
// --------------------------------------------------------

json scaling_doc() {
  json d = base_doc("sharegpt", 6, 60.0, 5);
  d["workload"]["rate"] = 1.0;
  d["scaling"] = {{"n_lower", 3},
                  {"n_upper", 6},
                  {"automatic", false},
                  {"script", {{{"at", 60.0}, {"direction", "expand"}}}}};
  return d;
}

Outcome scaling_recovery() {
  const padg::Scenario demo = padg::load_scenario(
      PADGSIM_SOURCE_DIR "/configs/scale_demo_sharegpt.json");
  const padg::RunOutput run = padg::run_scenario(demo);
  const double bucket = 30.0;
  double end = 0.0;
  for (const auto& r : run.requests) end = std::max(end, r.arrival_time);
  const auto timeline =
      padg::attainment_timeline(run.result.records, demo.slo, bucket, end);
  const double target = demo.scaling->attainment_target;

  int dips = 0, handled = 0;
  std::string dip_list;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const double a = timeline[i].attainment;
    if (!(a < target)) continue;  // NaN buckets are not dips
    ++dips;
    const double t0 = timeline[i].start;
    bool grew = false;
    for (const auto& e : run.scaling) {
      if ((e.kind == padg::ScalingKind::kAddInstance ||
           e.kind == padg::ScalingKind::kSplit) &&
          e.time >= t0 && e.time < t0 + 3 * bucket) {
        grew = true;
      }
    }
    bool recovered = false;
    for (std::size_t j = i + 1; j <= i + 2 && j < timeline.size(); ++j) {
      if (timeline[j].attainment >= target) recovered = true;
    }
    handled += grew && recovered;
    dip_list += " " + format_double(t0) + (grew && recovered ? "ok" : "X");
  }

  // Migration windows: bounded, and nothing routed into them.
  double worst_window = 0.0;
  std::size_t routed_into = 0, unfinished_migrations = 0;
  for (const padg::MigrationRecord& m : run.migrations) {
    if (std::isnan(m.finished)) {
      ++unfinished_migrations;
      continue;
    }
    worst_window = std::max(worst_window, m.finished - m.started);
    for (const auto& e : run.routing) {
      if (e.instance == m.instance && e.time > m.started &&
          e.time < m.finished) {
        ++routed_into;
      }
    }
  }
  const double overhead = demo.scaling->migration_overhead;

  // Record diff: a split at t=60 with no later arrivals must leave every
  // request's timeline untouched.
  const padg::Scenario with = padg::parse_scenario(scaling_doc());
  json plain_doc = scaling_doc();
  plain_doc.erase("scaling");
  const padg::Scenario plain = padg::parse_scenario(plain_doc);
  const padg::RunOutput a = padg::run_scenario(with);
  const padg::RunOutput b = padg::run_scenario(plain);
  std::ostringstream ca, cb;
  padg::write_requests_csv(ca, a.result.records, with.slo);
  padg::write_requests_csv(cb, b.result.records, plain.slo);
  std::size_t in_flight = 0;
  for (const auto& r : a.result.records) {
    in_flight += r.completion_time > 60.0;
  }
  const bool identical = ca.str() == cb.str();

  const bool pass = dips > 0 && handled == dips && unfinished_migrations == 0 &&
                    !run.migrations.empty() &&
                    worst_window <= overhead + 1e-9 && routed_into == 0 &&
                    identical && !a.migrations.empty() && in_flight > 0;
  return {pass, std::to_string(dips) + " dips, " + std::to_string(handled) +
                    " followed by growth and recovery within 2 buckets [" +
                    dip_list.substr(dip_list.empty() ? 0 : 1) + "]; " +
                    std::to_string(run.migrations.size()) +
                    " migrations, longest window " + fmt(worst_window) +
                    " s, " + std::to_string(routed_into) +
                    " routed into a window; " + "record diff over " +
                    std::to_string(in_flight) + " in-flight requests across " +
                    std::to_string(a.migrations.size()) +
                    " migrations: " + (identical ? "identical" : "DIFFERENT")};
}

// --- 8: determinism
// -----------------------------------------------------------------

std::string all_csv(const padg::Scenario& sc, const padg::RunOutput& run) {
  std::ostringstream out;
  padg::write_requests_csv(out, run.result.records, sc.slo);
  padg::write_summary_csv(out, sc, run);
  padg::write_routing_log(out, run.routing);
  padg::write_scaling_csv(out, run.scaling);
  return out.str();
}

Outcome determinism() {
  std::vector<padg::Scenario> scenarios;
  scenarios.push_back(padg::load_scenario(PADGSIM_SOURCE_DIR
                                          "/configs/scale_demo_sharegpt.json"));
  for (const char* name : {"nodg-separate", "nodg-hybrid", "fudg"}) {
    json d = base_doc("alpaca", 4, 120.0, 9);
    d["strategy"]["name"] = name;
    d["workload"]["rate"] = 4.0;
    scenarios.push_back(padg::parse_scenario(d));
  }
  int same = 0;
  std::size_t bytes = 0;
  for (const auto& sc : scenarios) {
    const std::string x = all_csv(sc, padg::run_scenario(sc));
    const std::string y = all_csv(sc, padg::run_scenario(sc));
    same += x == y;
    bytes += x.size();
  }
  return {same == static_cast<int>(scenarios.size()),
          std::to_string(same) + "/" + std::to_string(scenarios.size()) +
              " scenarios byte-identical (" + std::to_string(bytes) +
              " bytes of CSV)"};
}

// --- 9: conservation
// --------------------------------------------------------------

Outcome conservation() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* models[] = {"llama-30b", "codellama-34b", "qwen2-72b"};
  const char* devices[] = {"l20", "a800"};
  const char* presets[] = {"sharegpt", "alpaca", "longbench"};
  int ok = 0, fudg_runs = 0;
  std::string first_error;
  for (int i = 0; i < 100; ++i) {
    const int instances = 2 + static_cast<int>(4 * u(rng));
    const std::string strategy = padg::kStrategyNames[i % 4];
    json d = base_doc(presets[static_cast<int>(3 * u(rng))], instances,
                      20.0 + 20.0 * u(rng), i);
    d["model"] = models[static_cast<int>(3 * u(rng))];
    d["device"] = devices[static_cast<int>(2 * u(rng))];
    d["workload"]["rate"] = 0.5 + 3.0 * u(rng);
    d["strategy"]["name"] = strategy;
    d["horizon"] = 1e7;  // drain overloaded runs so byte totals are final
    if (u(rng) < 0.5 && instances >= 2) {
      const int first = 1 + static_cast<int>((instances - 1) * u(rng));
      d["strategy"]["padg"]["macro_sizes"] = {first, instances - first};
    }
    d["strategy"]["fudg"]["hops"] = u(rng) < 0.5 ? 1 : 2;
    d["strategy"]["fudg"]["prefill_instances"] =
        1 + static_cast<int>((instances - 1) * u(rng));
    if (strategy == "padg" && u(rng) < 0.3) {
      d["scaling"] = {{"n_lower", 2},
                      {"n_upper", 4},
                      {"check_period", 5},
                      {"cooldown", 5},
                      {"attainment_window", 10}};
    }
    try {
      const padg::Scenario sc = padg::parse_scenario(d);
      padg::RunOverrides o;
      o.check_invariants = true;  // KV conservation after every event
      const padg::RunOutput run = padg::run_scenario(sc, o);
      bool good = run.result.quiescent;
      std::string why = good ? "" : "not quiescent";
      if (strategy == "fudg") {
        ++fudg_runs;
        const double per_token = padg::kv_bytes_per_token(sc.instance.model);
        double tokens = 0.0;
        for (const auto& r : run.requests) tokens += r.input_len;
        const double hops = sc.strategy.fudg.hops;
        good = good &&
               std::abs(run.transferred_bytes - tokens * per_token) <= 1.0 &&
               std::abs(run.link_bytes - hops * tokens * per_token) <= 1.0;
        if (!good && why.empty()) {
          why = "transferred " + format_double(run.transferred_bytes) +
                " link " + format_double(run.link_bytes) + " expected " +
                format_double(tokens * per_token);
        }
      }
      if (good) {
        ++ok;
      } else if (first_error.empty()) {
        first_error =
            "scenario " + std::to_string(i) + " (" + strategy + "): " + why;
      }
    } catch (const std::exception& e) {
      if (first_error.empty()) {
        first_error = "scenario " + std::to_string(i) + ": " + e.what();
      }
    }
  }
  return {ok == 100, std::to_string(ok) + "/100 scenarios conserve KV (" +
                         std::to_string(fudg_runs) + " FuDG with byte checks)" +
                         (first_error.empty() ? "" : "; " + first_error)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "bandwidth oracle", bandwidth_oracle},
      {2, "KV sizing", kv_sizing},
      {3, "admission check vs oracle", admission_oracle},
      {4, "mitosis walk", mitosis_walk},
      {5, "rolling activation liveness", rolling_liveness},
      {6, "strategy ordering", strategy_ordering},
      {7, "scaling recovery", scaling_recovery},
      {8, "determinism", determinism},
      {9, "conservation", conservation},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    failed += !out.pass;
    std::cout << "criterion " << c.id << " " << c.name << ": "
              << (out.pass ? "PASS" : "FAIL") << " (" << fmt(secs, 3) << " s) "
              << out.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
