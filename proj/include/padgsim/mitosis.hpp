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
#include <string>
#include <string_view>
#include <vector>

namespace padg {

struct ScalingPolicy {
  int n_lower = 3;
  int n_upper = 6;
  // Expand when joint attainment over the trailing window drops below target.
  double attainment_window = 30.0;
  double attainment_target = 0.9;
  // Contract when utilization stays below the threshold this long.
  double utilization_threshold = 0.4;
  double utilization_sustain = 60.0;
  double check_period = 10.0;
  // Minimum time between two scaling actions.
  double cooldown = 20.0;
  double migration_overhead = 0.1;
  // Cost of re-initializing an instance from scratch; reported only.
  double reinit_cost = 180.0;
  // Delay before a freshly added instance can take requests.
  double warmup = 0.0;
  int max_instances = 0;  // 0 = unbounded
  int min_instances = 1;

  void validate(std::string_view path = "scaling") const;
};

enum class ScaleDirection { kNone, kExpand, kContract };

enum class ScalingKind { kNone, kAddInstance, kRemoveInstance, kSplit, kMerge };

std::string_view to_string(ScalingKind kind);

// Macro indices refer to positions in the size vector given to scale_step.
// kSplit adds one instance to `macro` and then detaches n_lower instances
// into a new macro appended at the end. kMerge removes one instance from
// `other` and folds the rest of `other` into `macro`.
struct ScalingAction {
  ScalingKind kind = ScalingKind::kNone;
  int macro = -1;
  int other = -1;

  bool operator==(const ScalingAction&) const = default;
};

// Picks at most one action for the given macro sizes.
ScalingAction scale_step(const std::vector<int>& sizes, ScaleDirection dir,
                         const ScalingPolicy& policy);

// Sizes after `action`; Merge erases `other` from the vector.
std::vector<int> apply_action(std::vector<int> sizes,
                              const ScalingAction& action,
                              const ScalingPolicy& policy);

// Proxy for an instance that a macro scheduler can hand to another one.
struct InstanceHandler {
  std::uint64_t actor_id = 0;
  std::string worker_address;
  std::string model;
  std::string device;
  std::uint32_t tp_degree = 1;

  bool operator==(const InstanceHandler&) const = default;
};

inline constexpr std::uint8_t kHandlerVersion = 1;

// Version byte, then each field as u32 little-endian length + payload. Integer
// payloads are little-endian (actor_id 8 bytes, tp_degree 4 bytes).
std::string serialize(const InstanceHandler& handler);
// Throws VersionMismatch on an unknown version byte and ParseError on a
// truncated or oversized buffer.
InstanceHandler deserialize(std::string_view bytes);

}  // namespace padg
