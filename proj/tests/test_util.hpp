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
#include <random>
#include <vector>

#include "padgsim/core_model.hpp"
#include "padgsim/profiles.hpp"
#include "padgsim/workload.hpp"

namespace padg::testing {

// Small model whose step times are easy to reason about.
inline InstanceConfig toy_instance(double kv_capacity_tokens = 4096.0) {
  InstanceConfig cfg;
  cfg.model.name = "toy";
  cfg.model.layer_num = 2;
  cfg.model.hidden_size = 64;
  cfg.model.heads = 4;
  cfg.model.size_per_head = 16;
  cfg.model.kv_groups = 1;
  cfg.model.bytes_per_element = 2;
  cfg.model.weights_bytes = 1e6;
  cfg.device.name = "toy";
  cfg.device.peak_flops = 1e11;
  cfg.device.mem_bandwidth = 1e9;
  cfg.device.mem_capacity = 1e9;
  cfg.kv_capacity_bytes = kv_capacity_tokens * kv_bytes_per_token(cfg.model);
  return cfg;
}

inline InstanceConfig llama_l20() {
  const ProfileSet& p = bundled_profiles();
  return p.calibration_instance(*p.calibration("llama-30b", "l20"));
}

inline Request req(RequestId id, double arrival, std::int64_t in,
                   std::int64_t out) {
  Request r;
  r.id = id;
  r.arrival_time = arrival;
  r.input_len = in;
  r.output_len = out;
  return r;
}

// Poisson arrivals with uniform lengths; ids 0..n-1.
inline std::vector<Request> random_requests(std::mt19937_64& rng, int n,
                                            double rate, std::int64_t max_in,
                                            std::int64_t max_out) {
  std::exponential_distribution<double> gap(rate);
  std::uniform_int_distribution<std::int64_t> in(1, max_in);
  std::uniform_int_distribution<std::int64_t> out(1, max_out);
  std::vector<Request> v;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += gap(rng);
    v.push_back(req(i, t, in(rng), out(rng)));
  }
  return v;
}

}  // namespace padg::testing
