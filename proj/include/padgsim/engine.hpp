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
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "padgsim/core_model.hpp"
#include "padgsim/workload.hpp"

namespace padg {

using InstanceId = std::int32_t;
inline constexpr InstanceId kNoInstance = -1;
inline constexpr double kNever = std::numeric_limits<double>::quiet_NaN();

enum class EventKind {
  kArrival,
  kPrefillBatchDone,
  kDecodeStepDone,
  kKvTransferDone,
  kStatusUpdate,
  kScaleCheck,
  kTransferStage,
  kMigrationDone,
};

std::string_view to_string(EventKind kind);

// Processed in (time, seq) order; seq comes from one counter, so equal-time
// events run in creation order.
struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kArrival;
  std::int64_t a = -1;  // kind-specific payload
  std::int64_t b = -1;
  std::uint64_t token = 0;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.time != y.time) {
      return x.time > y.time;
    }
    return x.seq > y.seq;
  }
};

// How an instance turns its queues into work.
enum class InstanceMode {
  // Separate batching, prefill priority: pending prompts run in prefill
  // windows; prefilled requests join the decode batch when the window ends.
  kSeparate,
  // Hybrid batching with chunked prefill, decode priority.
  kHybrid,
  // Prefill only; finished prompts are handed to the strategy for transfer.
  kPrefillOnly,
  // Decode only; fed by handoff().
  kDecodeOnly,
};

struct RequestRecord {
  RequestId id = 0;
  double arrival_time = 0.0;
  std::int64_t input_len = 0;
  std::int64_t true_output_len = 0;
  InstanceId routed_instance = kNoInstance;
  double routed_time = kNever;
  double prefill_end_time = kNever;   // first token
  double decode_begin_time = kNever;  // first decode iteration after prefill
  std::int64_t tokens_generated = 0;
  double completion_time = kNever;
  InstanceId decode_instance = kNoInstance;
  std::int32_t preemptions = 0;

  bool finished() const { return completion_time == completion_time; }
};

struct InstanceState {
  InstanceId id = kNoInstance;
  InstanceConfig cfg;
  InstanceMode mode = InstanceMode::kSeparate;
  Phase phase = Phase::kIdle;
  double t_switch = 0.0;
  std::deque<RequestId> pending_prefills;
  std::vector<RequestId> prefilled;  // waiting for the prefill window to end
  std::vector<RequestId> active_decodes;
  std::deque<RequestId> incoming;   // decode-only: handed off, not admitted
  std::vector<RequestId> outbound;  // prefill-only: waiting for transfer
  std::int64_t kv_used_tokens = 0;
  std::int64_t kv_capacity_tokens = 0;
  std::uint64_t status_seq = 0;

  bool busy = false;
  Phase last_work = Phase::kIdle;
  double busy_since = 0.0;
  double busy_time = 0.0;
  double created_at = 0.0;
  double retired_at = kNever;
  bool retiring = false;

  double kv_used_bytes() const;
  double kv_capacity_bytes() const;
  std::size_t resident_count() const;
};

struct EngineOptions {
  double horizon = std::numeric_limits<double>::infinity();
  std::int64_t max_prefill_batch_tokens = 4096;
  // Hybrid batching.
  std::int64_t chunk_size = 256;
  std::int64_t token_budget = 512;
  // Re-verify KV conservation, capacity and clock order after every event.
  bool check_invariants = false;
};

struct BusyInterval {
  InstanceId instance;
  double start;
  double end;
  Phase work;
};

struct InstanceSummary {
  InstanceId id;
  InstanceMode mode;
  double created_at;
  double retired_at;
  double busy_time;
};

struct SimulationResult {
  std::vector<RequestRecord> records;
  std::vector<InstanceSummary> instances;
  std::vector<BusyInterval> busy_intervals;
  double end_time = 0.0;
  std::uint64_t events_processed = 0;
  std::size_t unfinished = 0;
  std::int64_t preemptions = 0;
  bool quiescent = true;
};

class Simulator;

// Routing and cross-instance policy. The engine executes instance work; the
// strategy decides where requests go.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  // Create instances and schedule periodic events.
  virtual void start(Simulator& sim) = 0;
  virtual void on_arrival(Simulator& sim, RequestId id) = 0;
  virtual void on_event(Simulator& /*sim*/, const Event& /*ev*/) {}
  // An instance finished a batch or iteration or changed phase.
  virtual void on_instance_event(Simulator& /*sim*/, InstanceId /*id*/) {}
  // Prefill-only instance finished a prompt; its KV sits in outbound.
  virtual void on_prefill_complete(Simulator& /*sim*/, InstanceId /*id*/,
                                   RequestId /*req*/) {}
  virtual void on_request_complete(Simulator& /*sim*/, InstanceId /*id*/,
                                   RequestId /*req*/) {}
};

// Optional per-event observer, called after each event with the engine in a
// consistent state.
using EventObserver = std::function<void(const Simulator&, const Event&)>;

class Simulator {
 public:
  Simulator(std::vector<Request> requests, EngineOptions options,
            Strategy& strategy);

  SimulationResult run();

  void set_observer(EventObserver observer) { observer_ = std::move(observer); }

  // --- strategy-facing API -------------------------------------------------
  double now() const { return now_; }
  const EngineOptions& options() const { return options_; }

  InstanceId add_instance(const InstanceConfig& cfg, InstanceMode mode);
  // Stop new work from landing here; the instance retires once it drains.
  void retire_instance(InstanceId id);

  // Route a prompt to an instance. A non-prefill instance switches phase at
  // this moment; an in-flight decode iteration still completes first.
  void assign_prefill(InstanceId id, RequestId req);
  // Move a transferred request from its prefill instance (freeing the KV
  // there) to a decode-only instance.
  void handoff(RequestId req, InstanceId decode_instance);

  void schedule(double time, EventKind kind, std::int64_t a = -1,
                std::int64_t b = -1, std::uint64_t token = 0);

  const InstanceState& instance(InstanceId id) const;
  const std::vector<InstanceState>& instances() const { return instances_; }
  const RequestRecord& record(RequestId id) const;
  const Request& request(RequestId id) const;
  std::span<const RequestRecord> records() const { return records_; }
  std::span<const BusyInterval> busy_intervals() const {
    return busy_intervals_;
  }

  // KV tokens a request currently holds on its instance.
  std::int64_t kv_tokens(RequestId id) const;
  // Prompt tokens still to prefill (including recomputation after preemption).
  std::int64_t remaining_prefill_tokens(RequestId id) const;
  // Requests that arrived or will arrive but have not finished.
  bool has_outstanding_work() const;
  std::size_t finished_count() const { return finished_; }

  // Throws InvariantViolation on broken KV conservation or capacity.
  void verify_invariants() const;

 private:
  enum class Location {
    kNotArrived,
    kUnrouted,
    kPending,
    kPrefilled,
    kDecoding,
    kOutbound,
    kIncoming,
    kDone,
  };

  struct RequestState {
    Location where = Location::kNotArrived;
    InstanceId instance = kNoInstance;
    std::int64_t prefill_target = 0;  // prompt tokens for the current prefill
    std::int64_t prefill_done = 0;
    std::int64_t gen_base = 0;  // tokens_generated when the target was set
    std::int64_t kv_tokens = 0;
    bool recompute = false;
  };

  struct InflightChunk {
    RequestId req;
    std::int64_t tokens;
  };

  // Strategy callbacks raised while the engine mutates state; delivered after
  // the current event so the strategy never sees a half-updated instance.
  struct Callback {
    enum class Kind { kInstance, kPrefillComplete, kRequestComplete };
    Kind kind;
    InstanceId instance;
    RequestId req;
  };

  InstanceState& mut_instance(InstanceId id);
  void handle(const Event& ev);
  void process(InstanceId id);
  bool try_start_prefill_batch(InstanceState& inst);
  bool try_start_decode_iteration(InstanceState& inst);
  bool try_start_hybrid_iteration(InstanceState& inst);
  // Drops the KV of partially prefilled prompts at index >= from.
  bool release_partial_prefills(InstanceState& inst, std::size_t from);
  void admit_incoming(InstanceState& inst);
  bool ensure_decode_headroom(InstanceState& inst, std::int64_t extra_tokens);
  void preempt(InstanceState& inst, RequestId req);
  void finish_prefill_batch(InstanceState& inst);
  void finish_decode_iteration(InstanceState& inst);
  void end_prefill_window(InstanceState& inst);
  void set_phase(InstanceState& inst, Phase phase);
  void begin_work(InstanceState& inst, Phase work, double duration,
                  EventKind done_kind);
  void end_work(InstanceState& inst);
  void complete_request(InstanceState& inst, RequestId id);
  void charge(InstanceState& inst, RequestId id, std::int64_t tokens);
  void maybe_retire(InstanceState& inst);
  void notify(InstanceId id);
  void drain_callbacks();

  std::vector<Request> requests_;
  std::vector<RequestRecord> records_;
  std::vector<RequestState> states_;
  std::vector<InstanceState> instances_;
  // Per instance: decodes and prefill slices of the running batch.
  std::vector<std::vector<RequestId>> inflight_decodes_;
  std::vector<std::vector<InflightChunk>> inflight_chunks_;
  std::vector<BusyInterval> busy_intervals_;
  EngineOptions options_;
  Strategy& strategy_;
  EventObserver observer_;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  std::size_t arrived_ = 0;
  std::size_t finished_ = 0;
  std::int64_t preemptions_ = 0;
  std::uint64_t events_processed_ = 0;
  std::deque<Callback> callbacks_;
};

}  // namespace padg
