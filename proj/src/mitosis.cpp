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

#include "padgsim/mitosis.hpp"

#include <algorithm>
#include <numeric>

#include "padgsim/errors.hpp"

namespace padg {

namespace {

void require(bool ok, std::string_view path, std::string_view field,
             const std::string& message) {
  if (!ok) {
    throw ValidationError(std::string(path) + "." + std::string(field),
                          message);
  }
}

// Index of the smallest size, ties to the lowest index, skipping `skip`.
int smallest(const std::vector<int>& sizes, int skip = -1) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(sizes.size()); ++i) {
    if (i == skip) {
      continue;
    }
    if (best < 0 || sizes[i] < sizes[best]) {
      best = i;
    }
  }
  return best;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_field(std::string& out, std::string_view payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.append(payload);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string_view field() {
    const std::uint32_t len = u32();
    need(len);
    std::string_view out = bytes_.substr(pos_, len);
    pos_ += len;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(pos_, "truncated instance handler");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 1;  // past the version byte
};

std::uint64_t read_le(std::string_view payload, std::size_t width) {
  if (payload.size() != width) {
    throw ParseError(0, "integer field has " + std::to_string(payload.size()) +
                            " bytes, expected " + std::to_string(width));
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

void ScalingPolicy::validate(std::string_view path) const {
  require(n_lower >= 1, path, "n_lower", "must be >= 1");
  require(n_upper >= n_lower, path, "n_upper", "must be >= n_lower");
  // A split of a full macro (n_upper + 1) must leave two macros of n_lower.
  require(n_upper + 1 >= 2 * n_lower, path, "n_upper",
          "must be >= 2 * n_lower - 1");
  require(attainment_window > 0.0, path, "attainment_window", "must be > 0");
  require(attainment_target > 0.0 && attainment_target <= 1.0, path,
          "attainment_target", "must be in (0, 1]");
  require(utilization_threshold >= 0.0 && utilization_threshold <= 1.0, path,
          "utilization_threshold", "must be in [0, 1]");
  require(utilization_sustain >= 0.0, path, "utilization_sustain",
          "must be >= 0");
  require(check_period > 0.0, path, "check_period", "must be > 0");
  require(cooldown >= 0.0, path, "cooldown", "must be >= 0");
  require(migration_overhead >= 0.0, path, "migration_overhead",
          "must be >= 0");
  require(reinit_cost >= 0.0, path, "reinit_cost", "must be >= 0");
  require(warmup >= 0.0, path, "warmup", "must be >= 0");
  require(max_instances >= 0, path, "max_instances", "must be >= 0");
  require(min_instances >= 1, path, "min_instances", "must be >= 1");
}

std::string_view to_string(ScalingKind kind) {
  switch (kind) {
    case ScalingKind::kNone:
      return "none";
    case ScalingKind::kAddInstance:
      return "add";
    case ScalingKind::kRemoveInstance:
      return "remove";
    case ScalingKind::kSplit:
      return "split";
    case ScalingKind::kMerge:
      return "merge";
  }
  return "?";
}

ScalingAction scale_step(const std::vector<int>& sizes, ScaleDirection dir,
                         const ScalingPolicy& policy) {
  if (sizes.empty() || dir == ScaleDirection::kNone) {
    return {};
  }
  const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  const int n = static_cast<int>(sizes.size());

  if (dir == ScaleDirection::kExpand) {
    if (policy.max_instances > 0 && total >= policy.max_instances) {
      return {};
    }
    // Fill the largest partial macro first so at most two stay partial.
    int target = -1;
    for (int i = 0; i < n; ++i) {
      if (sizes[i] < policy.n_upper &&
          (target < 0 || sizes[i] > sizes[target])) {
        target = i;
      }
    }
    if (target >= 0) {
      return {ScalingKind::kAddInstance, target, -1};
    }
    return {ScalingKind::kSplit, 0, -1};
  }

  if (total <= policy.min_instances) {
    return {};
  }
  if (n >= 2) {
    const int a = smallest(sizes);
    const int b = smallest(sizes, a);
    if (sizes[a] + sizes[b] <= policy.n_upper) {
      // Fold the smaller into the lower-indexed survivor.
      const int keep = std::min(a, b);
      const int fold = keep == a ? b : a;
      return {ScalingKind::kMerge, keep, fold};
    }
  }
  const int s = smallest(sizes);
  if (sizes[s] > policy.n_lower) {
    return {ScalingKind::kRemoveInstance, s, -1};
  }
  int target = -1;
  for (int i = 0; i < n; ++i) {
    if (sizes[i] > policy.n_lower && (target < 0 || sizes[i] < sizes[target])) {
      target = i;
    }
  }
  if (target >= 0) {
    return {ScalingKind::kRemoveInstance, target, -1};
  }
  return {};
}

std::vector<int> apply_action(std::vector<int> sizes,
                              const ScalingAction& action,
                              const ScalingPolicy& policy) {
  const int n = static_cast<int>(sizes.size());
  auto check = [&](int idx) {
    if (idx < 0 || idx >= n) {
      throw ValidationError("scaling.action", "macro index out of range");
    }
  };
  switch (action.kind) {
    case ScalingKind::kNone:
      break;
    case ScalingKind::kAddInstance:
      check(action.macro);
      ++sizes[action.macro];
      break;
    case ScalingKind::kRemoveInstance:
      check(action.macro);
      if (sizes[action.macro] <= 1) {
        throw ValidationError("scaling.action", "cannot empty a macro");
      }
      --sizes[action.macro];
      break;
    case ScalingKind::kSplit:
      check(action.macro);
      sizes[action.macro] = sizes[action.macro] + 1 - policy.n_lower;
      sizes.push_back(policy.n_lower);
      break;
    case ScalingKind::kMerge:
      check(action.macro);
      check(action.other);
      if (action.macro == action.other) {
        throw ValidationError("scaling.action",
                              "cannot merge a macro into itself");
      }
      sizes[action.macro] += sizes[action.other] - 1;
      sizes.erase(sizes.begin() + action.other);
      break;
  }
  return sizes;
}

std::string serialize(const InstanceHandler& handler) {
  std::string out;
  out.push_back(static_cast<char>(kHandlerVersion));
  std::string id;
  for (int i = 0; i < 8; ++i) {
    id.push_back(static_cast<char>((handler.actor_id >> (8 * i)) & 0xff));
  }
  put_field(out, id);
  put_field(out, handler.worker_address);
  put_field(out, handler.model);
  put_field(out, handler.device);
  std::string tp;
  put_u32(tp, handler.tp_degree);
  put_field(out, tp);
  return out;
}

InstanceHandler deserialize(std::string_view bytes) {
  if (bytes.empty()) {
    throw ParseError(0, "empty instance handler");
  }
  const auto version = static_cast<std::uint8_t>(bytes[0]);
  if (version != kHandlerVersion) {
    throw VersionMismatch("instance handler version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kHandlerVersion));
  }
  Reader r(bytes);
  InstanceHandler h;
  h.actor_id = read_le(r.field(), 8);
  h.worker_address = std::string(r.field());
  h.model = std::string(r.field());
  h.device = std::string(r.field());
  h.tp_degree = static_cast<std::uint32_t>(read_le(r.field(), 4));
  if (!r.done()) {
    throw ParseError(bytes.size(), "trailing bytes after instance handler");
  }
  return h;
}

}  // namespace padg
