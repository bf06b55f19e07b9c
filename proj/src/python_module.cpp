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

// Thin Python surface: scenarios go in as JSON text, results come back as
// plain dicts and CSV text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "padgsim/core_model.hpp"
#include "padgsim/errors.hpp"
#include "padgsim/metrics.hpp"
#include "padgsim/profiles.hpp"
#include "padgsim/routing_log.hpp"
#include "padgsim/scenario.hpp"

namespace py = pybind11;

namespace {

padg::Scenario parse(const std::string& config) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(config);
  } catch (const nlohmann::json::parse_error& e) {
    throw padg::ParseError(0, e.what());
  }
  return padg::parse_scenario(doc);
}

py::dict simulate(const std::string& config, std::optional<double> rate,
                  std::optional<std::string> strategy,
                  std::optional<std::uint64_t> seed) {
  const padg::Scenario sc = parse(config);
  padg::RunOverrides o;
  o.rate = rate;
  o.strategy = strategy;
  o.seed = seed;
  padg::RunOutput run;
  {
    py::gil_scoped_release release;
    run = padg::run_scenario(sc, o);
  }
  const padg::Attainment a = padg::attainment(run.result.records, sc.slo);
  std::ostringstream requests, summary, routing, scaling;
  padg::write_requests_csv(requests, run.result.records, sc.slo);
  padg::write_summary_csv(summary, sc, run);
  padg::write_routing_log(routing, run.routing);
  padg::write_scaling_csv(scaling, run.scaling);

  py::dict out;
  out["strategy"] = run.strategy;
  out["requests"] = run.requests.size();
  out["attainment"] = a.fraction;
  out["unfinished"] = a.unfinished;
  out["quiescent"] = run.result.quiescent;
  out["transferred_bytes"] = run.transferred_bytes;
  out["requests_csv"] = requests.str();
  out["summary_csv"] = summary.str();
  out["routing_csv"] = routing.str();
  out["scaling_csv"] = scaling.str();
  return out;
}

std::string sweep(const std::string& config) {
  const padg::Scenario sc = parse(config);
  std::vector<padg::SweepCell> cells;
  {
    py::gil_scoped_release release;
    cells = padg::run_sweep(sc);
  }
  std::ostringstream out;
  padg::write_sweep_csv(out, sc, cells);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "padgsim native core";

  static py::exception<padg::Error> error(m, "Error");
  static py::exception<padg::ValidationError> validation(m, "ValidationError",
                                                         error.ptr());
  static py::exception<padg::ParseError> parse_error(m, "ParseError",
                                                     error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const padg::ValidationError& e) {
      validation(e.what());
    } catch (const padg::ParseError& e) {
      parse_error(e.what());
    } catch (const padg::Error& e) {
      error(e.what());
    }
  });

  m.def("simulate", &simulate, py::arg("config"), py::arg("rate") = py::none(),
        py::arg("strategy") = py::none(), py::arg("seed") = py::none(),
        "Runs one scenario given as JSON text.");
  m.def("sweep", &sweep, py::arg("config"),
        "Goodput sweep over the scenario's sweep block; returns CSV text.");
  m.def(
      "kv_bytes_per_token",
      [](const std::string& model) {
        return padg::kv_bytes_per_token(padg::bundled_profiles().model(model));
      },
      py::arg("model"));
  m.def(
      "required_kv_bandwidth",
      [](const std::string& model, double tokens_per_s) {
        return padg::required_kv_bandwidth(
            padg::bundled_profiles().model(model), tokens_per_s);
      },
      py::arg("model"), py::arg("tokens_per_s"),
      "Bytes/s of KV a prefill stage emits at the given prompt throughput.");
  m.attr("strategies") =
      py::make_tuple("padg", "nodg-separate", "nodg-hybrid", "fudg");
}
