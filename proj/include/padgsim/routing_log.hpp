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

#include <iosfwd>
#include <string>
#include <vector>

#include "padgsim/engine.hpp"

namespace padg {

// Result of asking one instance to take a request.
struct ProbeOutcome {
  InstanceId instance = kNoInstance;
  bool available = true;
  bool ttft_ok = true;
  bool tpot_ok = true;
  bool kv_ok = true;

  bool ok() const { return available && ttft_ok && tpot_ok && kv_ok; }
  // "3:ok", "3:unavailable" or "3:fail(ttft+kv)".
  std::string str() const;
};

struct RoutingLogEntry {
  double time = 0.0;
  RequestId request = 0;
  int macro = -1;
  InstanceId instance = kNoInstance;  // kNoInstance when deferred
  std::vector<ProbeOutcome> probes;
};

// Header: time,request_id,macro_id,instance_id,constraints
void write_routing_log(std::ostream& out,
                       const std::vector<RoutingLogEntry>& log);

}  // namespace padg
