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
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "padgsim/engine.hpp"
#include "padgsim/mitosis.hpp"
#include "padgsim/routing_log.hpp"
#include "padgsim/workload.hpp"

namespace padg {

// One resident request as seen by the scheduler.
struct StatusRequest {
  RequestId id = 0;
  double routed_time = 0.0;
  std::int64_t input_len = 0;
  double first_token_time = kNever;  // NaN until the prompt is prefilled
  std::int64_t tokens_generated = 0;
};

struct InstanceStatus {
  InstanceId instance = kNoInstance;
  double snapshot_time = 0.0;
  Phase phase = Phase::kIdle;
  double t_switch = 0.0;
  std::vector<StatusRequest> requests;
  double kv_used = 0.0;  // bytes, committed
  double kv_capacity = 0.0;
};

enum class Constraint { kNone, kTtft, kTpot, kKvCapacity };

std::string_view to_string(Constraint c);

struct ConstraintResult {
  bool ttft_ok = true;
  bool tpot_ok = true;
  bool kv_ok = true;
  double t_total = 0.0;     // predicted prefill time of the window
  double mean_saved = 0.0;  // NaN when no decode counts
  std::size_t decode_count = 0;
  double kv_need = 0.0;

  bool satisfied() const { return ttft_ok && tpot_ok && kv_ok; }
  // First failing constraint in evaluation order, or kNone.
  Constraint failed() const;
};

// How the saved decode time of counted requests is compared with t_total.
// kMean averages it; kMin requires every counted request to cover t_total.
enum class TpotCheck { kMean, kMin };

struct AdmissionParams {
  // Output tokens reserved in the KV estimate of a new request.
  std::int64_t output_reservation_tokens = 0;
  double kv_bytes_per_token = 0.0;
  // Snapshots older than this raise StaleStatus.
  double staleness_bound = 0.2;
  TpotCheck tpot_check = TpotCheck::kMean;
};

// Predicted prefill duration of a prompt of the given length.
using PrefillPredictor = std::function<double(std::int64_t)>;

// A status taken when the instance is not in a prefill phase is evaluated as
// if the window opened at `now`, which is when routing would switch it.
ConstraintResult check_constraints(const InstanceStatus& status,
                                   std::int64_t input_len, const SloConfig& slo,
                                   const AdmissionParams& params,
                                   const PrefillPredictor& predict, double now);

struct MacroInstance {
  int id = 0;
  std::vector<InstanceId> instances;
  std::size_t prev_idx = 0;
  std::deque<RequestId> macro_queue;
};

// Statuses of routable instances; a missing id means unavailable.
using StatusMap = std::map<InstanceId, InstanceStatus>;

struct RouteDecision {
  std::optional<InstanceId> instance;  // empty means deferred
  std::vector<ProbeOutcome> probes;
};

// Tries instances[prev_idx], then the following members cyclically for one
// full cycle. Updates prev_idx on success only.
RouteDecision inter_schedule(MacroInstance& macro, std::int64_t input_len,
                             const StatusMap& statuses, const SloConfig& slo,
                             const AdmissionParams& params,
                             const PrefillPredictor& predict, double now);

enum class IntraAction { kStartPrefillWindow, kContinueDecode, kIdle };

// Prefill priority inside an instance.
IntraAction intra_policy(const InstanceState& inst);

struct PadgParams {
  std::vector<int> macro_sizes{1};
  double status_period = 0.05;
  double staleness_bound = 0.2;
  std::int64_t output_reservation_tokens = 0;
  TpotCheck tpot_check = TpotCheck::kMean;
  bool record_routing = true;
};

// A scaling decision forced at a fixed time (tests and demos).
struct ScriptedScale {
  double at = 0.0;
  ScaleDirection direction = ScaleDirection::kExpand;
};

struct ScalingLogEntry {
  double time = 0.0;
  ScalingKind kind = ScalingKind::kNone;
  std::vector<int> sizes_before;
  std::vector<int> sizes_after;
  std::string reason;
};

struct MigrationRecord {
  InstanceId instance = kNoInstance;
  int from_macro = -1;
  int to_macro = -1;
  double requested = 0.0;
  double started = 0.0;
  double finished = kNever;
};

class PadgStrategy : public Strategy {
 public:
  PadgStrategy(InstanceConfig cfg, SloConfig slo, PadgParams params,
               std::optional<ScalingPolicy> scaling = std::nullopt,
               std::vector<ScriptedScale> script = {});

  std::string name() const override { return "padg"; }
  void start(Simulator& sim) override;
  void on_arrival(Simulator& sim, RequestId id) override;
  void on_event(Simulator& sim, const Event& ev) override;
  void on_instance_event(Simulator& sim, InstanceId id) override;

  const std::vector<RoutingLogEntry>& routing_log() const {
    return routing_log_;
  }
  const std::vector<ScalingLogEntry>& scaling_log() const {
    return scaling_log_;
  }
  const std::vector<MigrationRecord>& migrations() const { return migrations_; }
  // Live macros in id order.
  std::vector<const MacroInstance*> macros() const;
  // Sizes counting each instance at its destination macro.
  std::vector<int> planned_sizes() const;
  std::size_t deferrals() const { return deferrals_; }

  InstanceStatus snapshot(const Simulator& sim, InstanceId id) const;

 private:
  struct Member {
    int owner = -1;
    int target = -1;
    bool migrating = false;          // handler in flight
    bool migration_pending = false;  // waits for the instance to leave prefill
    bool retiring = false;
    double routable_at = 0.0;
    std::uint64_t order = 0;  // when it joined its macro
    InstanceHandler handler;
  };

  struct Macro {
    MacroInstance state;
    bool alive = true;
    double wrr_current = 0.0;
  };

  InstanceId create_instance(Simulator& sim, int macro);
  int create_macro();
  bool routable(const Simulator& sim, InstanceId id) const;
  void refresh(const Simulator& sim, InstanceId id);
  void drain_queue(Simulator& sim, int macro);
  int pick_macro(const Simulator& sim);
  double predict(std::int64_t input_len);
  void amend(InstanceId id, RequestId req, const Simulator& sim);

  void scale_check(Simulator& sim, std::optional<ScaleDirection> forced);
  ScaleDirection decide(Simulator& sim);
  void apply(Simulator& sim, const ScalingAction& action,
             const std::string& reason);
  std::vector<int> live_macro_ids() const;
  void request_migration(Simulator& sim, InstanceId id, int to_macro);
  void start_migration(Simulator& sim, InstanceId id);
  void finish_migration(Simulator& sim, InstanceId id);
  void remove_member(int macro, InstanceId id);
  void maybe_bury(int macro);

  InstanceConfig cfg_;
  SloConfig slo_;
  PadgParams params_;
  std::optional<ScalingPolicy> scaling_;
  std::vector<ScriptedScale> script_;
  AdmissionParams admission_;

  std::vector<Macro> macros_;
  std::map<InstanceId, Member> members_;
  StatusMap statuses_;
  std::unordered_map<std::int64_t, double> predict_cache_;
  std::vector<RoutingLogEntry> routing_log_;
  std::vector<ScalingLogEntry> scaling_log_;
  std::vector<MigrationRecord> migrations_;
  std::size_t deferrals_ = 0;
  std::uint64_t join_counter_ = 0;
  double last_action_ = -1e300;
  std::vector<std::pair<double, double>> utilization_samples_;
  std::map<InstanceId, double> prefill_busy_total_;
  std::map<InstanceId, double> prefill_busy_seen_;
  std::size_t busy_scan_pos_ = 0;
  double last_check_ = 0.0;
  std::map<InstanceId, std::string> handler_bytes_;
  std::map<int, RequestId> last_deferred_;
};

}  // namespace padg
