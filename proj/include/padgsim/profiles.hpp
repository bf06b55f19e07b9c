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

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padgsim/core_model.hpp"

namespace padg {

// Fitted efficiencies for one (model, device) pair plus the deployment they
// were fitted against.
struct Calibration {
  std::string model;
  std::string device;
  std::int64_t tp_degree = 1;
  std::int64_t devices_per_node = 8;
  double comm_overhead_fraction = 0.0;
  double compute_efficiency = 1.0;
  double bandwidth_efficiency = 1.0;
  // Measured node-level prefill rate the fit targets, when one exists.
  std::optional<double> node_prefill_rate;
};

class ProfileSet {
 public:
  std::map<std::string, ModelProfile> models;
  std::map<std::string, DeviceProfile> devices;
  std::vector<Calibration> calibrations;

  const ModelProfile& model(const std::string& name,
                            const std::string& path = "model") const;
  const DeviceProfile& device(const std::string& name,
                              const std::string& path = "device") const;
  const Calibration* calibration(const std::string& model,
                                 const std::string& device) const;

  // Device with the calibrated efficiencies for `model` applied (the raw
  // device profile when no calibration exists).
  DeviceProfile calibrated_device(const std::string& model,
                                  const std::string& device) const;

  // Instance configuration matching a calibration entry's deployment.
  InstanceConfig calibration_instance(const Calibration& cal) const;
};

ProfileSet parse_profiles(const nlohmann::json& doc);
ProfileSet load_profiles(const std::string& path);

// Profiles compiled into the library from data/profiles.json.
const ProfileSet& bundled_profiles();
const std::string& bundled_profiles_text();

}  // namespace padg
