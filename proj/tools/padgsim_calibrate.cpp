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

// Fits compute_efficiency for every calibration entry with a measured node
// prefill rate. Entries without one take the value fitted for `copy_from` on
// the same device. Prints the table; --write rewrites the profile file.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>

#include "padgsim/core_model.hpp"
#include "padgsim/errors.hpp"
#include "padgsim/profiles.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fit compute efficiencies to measured prefill rates"};
  std::string path = "data/profiles.json";
  std::string copy_from = "codellama-34b";
  bool write = false;
  app.add_option("--profiles", path, "Profile file");
  app.add_option("--copy-from", copy_from,
                 "Model whose fit is reused when no rate is given");
  app.add_flag("--write", write, "Store fitted values back into the file");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(path);
    if (!in) {
      throw padg::Error("cannot open " + path);
    }
    std::stringstream text;
    text << in.rdbuf();
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(text.str());
    padg::ProfileSet set =
        padg::parse_profiles(nlohmann::json::parse(text.str()));

    std::map<std::string, double> fitted;  // "model/device"
    auto& cals = doc["calibrations"];
    for (std::size_t i = 0; i < set.calibrations.size(); ++i) {
      const padg::Calibration& cal = set.calibrations[i];
      if (!cal.node_prefill_rate) {
        continue;
      }
      const double instances = static_cast<double>(cal.devices_per_node) /
                               static_cast<double>(cal.tp_degree);
      const double eff = padg::calibrate_compute_efficiency(
          set.calibration_instance(cal), instances, *cal.node_prefill_rate);
      fitted[cal.model + "/" + cal.device] = eff;
      cals[i]["compute_efficiency"] = std::round(eff * 1e6) / 1e6;
    }
    for (std::size_t i = 0; i < set.calibrations.size(); ++i) {
      const padg::Calibration& cal = set.calibrations[i];
      if (cal.node_prefill_rate) {
        continue;
      }
      auto it = fitted.find(copy_from + "/" + cal.device);
      if (it == fitted.end()) {
        throw padg::Error("no fit for " + copy_from + "/" + cal.device);
      }
      cals[i]["compute_efficiency"] = std::round(it->second * 1e6) / 1e6;
    }

    // Report with the rounded values actually stored.
    padg::ProfileSet out =
        padg::parse_profiles(nlohmann::json::parse(doc.dump()));
    std::cout << "model           device  tp  efficiency  node_rate  target\n";
    for (const padg::Calibration& cal : out.calibrations) {
      const double instances = static_cast<double>(cal.devices_per_node) /
                               static_cast<double>(cal.tp_degree);
      const double rate =
          instances * padg::steady_prefill_rate(out.calibration_instance(cal));
      std::cout << cal.model
                << std::string(16 - std::min<std::size_t>(15, cal.model.size()),
                               ' ')
                << cal.device << "     " << cal.tp_degree << "   "
                << cal.compute_efficiency << "    " << rate << "    "
                << (cal.node_prefill_rate
                        ? std::to_string(*cal.node_prefill_rate)
                        : std::string("-"))
                << "\n";
    }
    if (write) {
      std::ofstream f(path);
      f << doc.dump(2) << "\n";
      if (!f) {
        throw padg::Error("cannot write " + path);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
