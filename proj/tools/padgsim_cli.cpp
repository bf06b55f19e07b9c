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

// padgsim: run one scenario, a goodput sweep, or a scaling demo.
//
// Exit codes: 0 ok, 1 runtime failure, 2 invalid config, 3 requests left
// unfinished at the horizon.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "padgsim/errors.hpp"
#include "padgsim/metrics.hpp"
#include "padgsim/routing_log.hpp"
#include "padgsim/scenario.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNonQuiescent = 3;

// PADGSIM_LOG: 0 quiet, 1 info (default), 2 debug.
int log_level() {
  static const int level = [] {
    const char* v = std::getenv("PADGSIM_LOG");
    if (v == nullptr) {
      return 1;
    }
    const std::string s(v);
    if (s == "quiet" || s == "0") return 0;
    if (s == "debug" || s == "2") return 2;
    return 1;
  }();
  return level;
}

std::ostream& info() {
  static std::ofstream null;
  return log_level() >= 1 ? std::cerr : null;
}

std::ostream& debug() {
  static std::ofstream null;
  return log_level() >= 2 ? std::cerr : null;
}

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;
  std::optional<std::string> strategy;
  std::optional<double> percentile;
  bool check_invariants = false;
};

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw padg::Error("cannot write " + path.string());
  }
  debug() << "writing " << path.string() << "\n";
  return f;
}

padg::Scenario load(const Flags& flags) {
  padg::Scenario sc = padg::load_scenario(flags.config);
  if (flags.seed) {
    sc.seed = *flags.seed;
  }
  return sc;
}

padg::RunOverrides overrides(const Flags& flags) {
  padg::RunOverrides o;
  o.rate = flags.rate;
  o.strategy = flags.strategy;
  o.seed = flags.seed;
  o.check_invariants = flags.check_invariants;
  return o;
}

void print_summary(const padg::Scenario& sc, const padg::RunOutput& run) {
  const padg::Attainment a = padg::attainment(run.result.records, sc.slo);
  std::cout << "scenario    " << sc.name << "\n"
            << "strategy    " << run.strategy << "\n"
            << "requests    " << a.total << "\n"
            << "attainment  " << padg::format_double(a.fraction) << "\n"
            << "unfinished  " << run.result.unfinished << "\n"
            << "preemptions " << run.result.preemptions << "\n"
            << "end time    " << padg::format_double(run.result.end_time)
            << " s\n"
            << "events      " << run.result.events_processed << "\n";
  if (run.strategy == "fudg") {
    std::cout << "kv bytes    " << padg::format_double(run.transferred_bytes)
              << "\n";
  }
  if (!run.scaling.empty()) {
    std::cout << "scaling     " << run.scaling.size() << " actions\n";
  }
}

void write_run_files(const Flags& flags, const padg::Scenario& sc,
                     const padg::RunOutput& run) {
  {
    auto f = open_out(flags.out, "requests.csv");
    padg::write_requests_csv(f, run.result.records, sc.slo);
  }
  {
    auto f = open_out(flags.out, "summary.csv");
    padg::write_summary_csv(f, sc, run);
  }
  if (!run.routing.empty()) {
    auto f = open_out(flags.out, "routing.csv");
    padg::write_routing_log(f, run.routing);
  }
  if (sc.scaling || !sc.scaling_script.empty()) {
    auto f = open_out(flags.out, "scaling.csv");
    padg::write_scaling_csv(f, run.scaling);
  }
}

int cmd_simulate(const Flags& flags) {
  const padg::Scenario sc = load(flags);
  info() << "simulating " << sc.name << "\n";
  const padg::RunOutput run = padg::run_scenario(sc, overrides(flags));
  write_run_files(flags, sc, run);
  print_summary(sc, run);
  return run.result.quiescent ? kExitOk : kExitNonQuiescent;
}

int cmd_sweep(const Flags& flags) {
  padg::Scenario sc = load(flags);
  if (flags.strategy) {
    sc.sweep.strategies = {*flags.strategy};
  }
  if (flags.percentile) {
    if (!(*flags.percentile > 0.0 && *flags.percentile <= 1.0)) {
      throw padg::ValidationError("--percentile", "must be in (0, 1]");
    }
    sc.sweep.percentiles = {*flags.percentile};
  }
  if (sc.sweep.rates.empty()) {
    throw padg::ValidationError("sweep.rates", "must not be empty");
  }
  info() << "sweeping " << sc.sweep.strategies.size() << " strategies over "
         << sc.sweep.rates.size() << " rates\n";
  const std::vector<padg::SweepCell> cells = padg::run_sweep(sc);
  {
    auto f = open_out(flags.out, "sweep.csv");
    padg::write_sweep_csv(f, sc, cells);
  }
  std::cout << "strategy        pct    goodput_rps  tokens_per_s\n";
  for (const padg::SweepCell& c : cells) {
    std::string name = c.strategy;
    if (c.prefill_instances > 0) {
      name += " " + std::to_string(c.prefill_instances) + "P" +
              std::to_string(sc.instances - c.prefill_instances) + "D";
    }
    name.resize(std::max<std::size_t>(name.size(), 15), ' ');
    std::cout << name << " " << padg::format_double(c.percentile) << "  "
              << (c.feasible ? padg::format_double(c.goodput.rate) : "none")
              << "  "
              << (c.feasible ? padg::format_double(c.goodput.tokens_per_s)
                             : "none")
              << (c.goodput.non_monotone ? "  (non-monotone)" : "") << "\n";
  }
  return kExitOk;
}

int cmd_scale_demo(const Flags& flags, double bucket) {
  const padg::Scenario sc = load(flags);
  if (!sc.scaling && sc.scaling_script.empty()) {
    throw padg::ValidationError("scaling", "scale-demo needs a scaling block");
  }
  padg::RunOverrides o = overrides(flags);
  o.strategy = "padg";
  const padg::RunOutput run = padg::run_scenario(sc, o);
  write_run_files(flags, sc, run);
  {
    auto f = open_out(flags.out, "timeline.csv");
    double end = 0.0;
    for (const padg::Request& r : run.requests) {
      end = std::max(end, r.arrival_time);
    }
    padg::write_timeline_csv(
        f, padg::attainment_timeline(run.result.records, sc.slo, bucket, end));
  }
  print_summary(sc, run);
  for (const padg::ScalingLogEntry& e : run.scaling) {
    std::cout << "  t=" << padg::format_double(e.time) << " "
              << padg::to_string(e.kind) << " " << e.reason << "\n";
  }
  return run.result.quiescent ? kExitOk : kExitNonQuiescent;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"padgsim: LLM serving cluster simulator"};
  app.require_subcommand(1);
  Flags flags;
  double bucket = 30.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Scenario JSON")->required();
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Override the scenario seed");
    sub->add_option("--strategy", flags.strategy,
                    "padg | nodg-separate | nodg-hybrid | fudg");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Run one simulation");
  add_common(simulate);
  simulate->add_option("--rate", flags.rate, "Constant request rate (req/s)");
  simulate->add_flag("--check-invariants", flags.check_invariants,
                     "Verify engine invariants after every event");

  CLI::App* sweep = app.add_subcommand("sweep", "Goodput over a rate grid");
  add_common(sweep);
  sweep->add_option("--percentile", flags.percentile,
                    "Only this attainment target, e.g. 0.9");

  CLI::App* demo =
      app.add_subcommand("scale-demo", "Ramp with mitosis scaling enabled");
  add_common(demo);
  demo->add_option("--bucket", bucket, "Timeline bucket (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (demo->parsed()) return cmd_scale_demo(flags, bucket);
  } catch (const padg::ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const padg::ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const padg::SchemaError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const padg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
