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

#include "padgsim/profiles.hpp"

#include <fstream>
#include <sstream>

#include "padgsim/errors.hpp"
#include "padgsim/json_reader.hpp"

namespace padg {

namespace {

ModelProfile parse_model(const std::string& name, const nlohmann::json& obj,
                         const std::string& path) {
  ObjectReader r(obj, path);
  ModelProfile m;
  m.name = name;
  m.layer_num = r.required<std::int64_t>("layer_num");
  m.hidden_size = r.required<std::int64_t>("hidden_size");
  m.heads = r.required<std::int64_t>("heads");
  m.size_per_head = r.required<std::int64_t>("size_per_head");
  m.kv_groups = r.optional<std::int64_t>("kv_groups", 1);
  m.bytes_per_element = r.optional<std::int64_t>("bytes_per_element", 2);
  m.weights_bytes = r.required<double>("weights_bytes");
  r.optional<std::string>("source", "");
  r.finish();
  m.validate(path);
  return m;
}

DeviceProfile parse_device(const std::string& name, const nlohmann::json& obj,
                           const std::string& path) {
  ObjectReader r(obj, path);
  DeviceProfile d;
  d.name = name;
  d.peak_flops = r.required<double>("peak_flops");
  d.mem_bandwidth = r.required<double>("mem_bandwidth");
  d.mem_capacity = r.required<double>("mem_capacity");
  d.compute_efficiency = r.optional<double>("compute_efficiency", 1.0);
  d.bandwidth_efficiency = r.optional<double>("bandwidth_efficiency", 1.0);
  r.optional<std::string>("source", "");
  r.finish();
  d.validate(path);
  return d;
}

Calibration parse_calibration(const nlohmann::json& obj,
                              const std::string& path) {
  ObjectReader r(obj, path);
  Calibration c;
  c.model = r.required<std::string>("model");
  c.device = r.required<std::string>("device");
  c.tp_degree = r.required<std::int64_t>("tp_degree");
  c.devices_per_node = r.optional<std::int64_t>("devices_per_node", 8);
  c.comm_overhead_fraction = r.optional<double>("comm_overhead_fraction", 0.0);
  c.compute_efficiency = r.required<double>("compute_efficiency");
  c.bandwidth_efficiency = r.required<double>("bandwidth_efficiency");
  if (r.has("node_prefill_rate")) {
    c.node_prefill_rate = r.required<double>("node_prefill_rate");
  } else {
    r.optional<double>("node_prefill_rate", 0.0);
  }
  r.optional<std::string>("note", "");
  r.finish();
  return c;
}

}  // namespace

const ModelProfile& ProfileSet::model(const std::string& name,
                                      const std::string& path) const {
  auto it = models.find(name);
  if (it == models.end()) {
    throw ValidationError(path, "unknown model profile '" + name + "'");
  }
  return it->second;
}

const DeviceProfile& ProfileSet::device(const std::string& name,
                                        const std::string& path) const {
  auto it = devices.find(name);
  if (it == devices.end()) {
    throw ValidationError(path, "unknown device profile '" + name + "'");
  }
  return it->second;
}

const Calibration* ProfileSet::calibration(const std::string& model,
                                           const std::string& device) const {
  for (const Calibration& c : calibrations) {
    if (c.model == model && c.device == device) {
      return &c;
    }
  }
  return nullptr;
}

DeviceProfile ProfileSet::calibrated_device(const std::string& model,
                                            const std::string& device) const {
  DeviceProfile d = this->device(device);
  if (const Calibration* c = calibration(model, device)) {
    d.compute_efficiency = c->compute_efficiency;
    d.bandwidth_efficiency = c->bandwidth_efficiency;
  }
  return d;
}

InstanceConfig ProfileSet::calibration_instance(const Calibration& cal) const {
  InstanceConfig cfg;
  cfg.model = model(cal.model);
  cfg.device = calibrated_device(cal.model, cal.device);
  cfg.device_count = cal.tp_degree;
  cfg.tp_degree = cal.tp_degree;
  cfg.comm_overhead_fraction = cal.comm_overhead_fraction;
  cfg.kv_capacity_bytes =
      default_kv_capacity(cfg.model, cfg.device, cfg.device_count);
  return cfg;
}

ProfileSet parse_profiles(const nlohmann::json& doc) {
  ObjectReader root(doc, "");
  ProfileSet set;
  const auto& models = root.raw("models");
  if (!models.is_object()) {
    throw ValidationError("models", "expected an object");
  }
  for (const auto& item : models.items()) {
    set.models.emplace(item.key(), parse_model(item.key(), item.value(),
                                               "models." + item.key()));
  }
  const auto& devices = root.raw("devices");
  if (!devices.is_object()) {
    throw ValidationError("devices", "expected an object");
  }
  for (const auto& item : devices.items()) {
    set.devices.emplace(item.key(), parse_device(item.key(), item.value(),
                                                 "devices." + item.key()));
  }
  if (root.has("calibrations")) {
    const auto& cals = root.raw("calibrations");
    if (!cals.is_array()) {
      throw ValidationError("calibrations", "expected an array");
    }
    for (std::size_t i = 0; i < cals.size(); ++i) {
      const std::string path = "calibrations[" + std::to_string(i) + "]";
      Calibration c = parse_calibration(cals[i], path);
      set.model(c.model, path + ".model");
      set.device(c.device, path + ".device");
      set.calibrations.push_back(std::move(c));
    }
  } else {
    root.optional<int>("calibrations", 0);
  }
  root.optional<std::string>("comment", "");
  root.finish();
  return set;
}

ProfileSet load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("profiles", "cannot open '" + path + "'");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("profiles", e.what());
  }
  return parse_profiles(doc);
}

const ProfileSet& bundled_profiles() {
  static const ProfileSet set =
      parse_profiles(nlohmann::json::parse(bundled_profiles_text()));
  return set;
}

}  // namespace padg
