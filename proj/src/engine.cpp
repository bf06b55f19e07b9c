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

#include "padgsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "padgsim/errors.hpp"

namespace padg {

namespace {

template <typename C>
void erase_value(C& c, RequestId id) {
  auto it = std::find(c.begin(), c.end(), id);
  if (it == c.end()) {
    throw InvariantViolation("request " + std::to_string(id) +
                             " missing from its instance queue");
  }
  c.erase(it);
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kArrival:
      return "arrival";
    case EventKind::kPrefillBatchDone:
      return "prefill_batch_done";
    case EventKind::kDecodeStepDone:
      return "decode_step_done";
    case EventKind::kKvTransferDone:
      return "kv_transfer_done";
    case EventKind::kStatusUpdate:
      return "status_update";
    case EventKind::kScaleCheck:
      return "scale_check";
    case EventKind::kTransferStage:
      return "transfer_stage";
    case EventKind::kMigrationDone:
      return "migration_done";
  }
  return "?";
}

double InstanceState::kv_used_bytes() const {
  return static_cast<double>(kv_used_tokens) * kv_bytes_per_token(cfg.model);
}

double InstanceState::kv_capacity_bytes() const {
  return static_cast<double>(kv_capacity_tokens) *
         kv_bytes_per_token(cfg.model);
}

std::size_t InstanceState::resident_count() const {
  return pending_prefills.size() + prefilled.size() + active_decodes.size() +
         incoming.size() + outbound.size();
}

Simulator::Simulator(std::vector<Request> requests, EngineOptions options,
                     Strategy& strategy)
    : requests_(std::move(requests)), options_(options), strategy_(strategy) {
  if (requests_.empty()) {
    throw EmptyInput("workload has no requests");
  }
  if (options_.max_prefill_batch_tokens < 1) {
    throw ValidationError("engine.max_prefill_batch_tokens", "must be >= 1");
  }
  if (options_.chunk_size < 1) {
    throw ValidationError("engine.chunk_size", "must be >= 1");
  }
  if (options_.token_budget < 1) {
    throw ValidationError("engine.token_budget", "must be >= 1");
  }
  if (!(options_.horizon > 0.0)) {
    throw ValidationError("engine.horizon", "must be > 0");
  }
  records_.resize(requests_.size());
  states_.resize(requests_.size());
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    const Request& r = requests_[i];
    if (r.id != static_cast<RequestId>(i)) {
      throw ValidationError("workload",
                            "request ids must be 0..n-1 in arrival order");
    }
    if (i > 0 && r.arrival_time < requests_[i - 1].arrival_time) {
      throw ValidationError("workload", "arrivals must be non-decreasing");
    }
    if (r.input_len < 1 || r.output_len < 1) {
      throw ValidationError(
          "workload",
          "request " + std::to_string(i) + " needs input_len, output_len >= 1");
    }
    RequestRecord& rec = records_[i];
    rec.id = r.id;
    rec.arrival_time = r.arrival_time;
    rec.input_len = r.input_len;
    rec.true_output_len = r.output_len;
  }
}

SimulationResult Simulator::run() {
  strategy_.start(*this);
  drain_callbacks();
  for (const Request& r : requests_) {
    schedule(r.arrival_time, EventKind::kArrival, r.id);
  }

  bool hit_horizon = false;
  while (!queue_.empty()) {
    Event ev = queue_.top();
    if (ev.time > options_.horizon) {
      hit_horizon = true;
      break;
    }
    queue_.pop();
    if (ev.time < now_) {
      throw InvariantViolation("event at " + std::to_string(ev.time) +
                               " precedes clock " + std::to_string(now_));
    }
    now_ = ev.time;
    ++events_processed_;
    handle(ev);
    drain_callbacks();
    if (options_.check_invariants) {
      verify_invariants();
    }
    if (observer_) {
      observer_(*this, ev);
    }
    // Periodic strategy events would keep the queue alive forever.
    if (!has_outstanding_work()) {
      break;
    }
  }

  SimulationResult out;
  const double end = hit_horizon ? options_.horizon : now_;
  for (InstanceState& inst : instances_) {
    if (inst.busy) {
      busy_intervals_.push_back(
          {inst.id, inst.busy_since, end, inst.last_work});
      inst.busy_time += end - inst.busy_since;
    }
    out.instances.push_back(
        {inst.id, inst.mode, inst.created_at, inst.retired_at, inst.busy_time});
  }
  out.records = records_;
  out.busy_intervals = busy_intervals_;
  out.end_time = end;
  out.events_processed = events_processed_;
  out.unfinished = requests_.size() - finished_;
  out.preemptions = preemptions_;
  out.quiescent = out.unfinished == 0;
  return out;
}

InstanceId Simulator::add_instance(const InstanceConfig& cfg,
                                   InstanceMode mode) {
  cfg.validate();
  InstanceState inst;
  inst.id = static_cast<InstanceId>(instances_.size());
  inst.cfg = cfg;
  inst.mode = mode;
  inst.phase = Phase::kIdle;
  inst.t_switch = now_;
  inst.created_at = now_;
  inst.kv_capacity_tokens = static_cast<std::int64_t>(
      std::floor(cfg.kv_capacity_bytes / kv_bytes_per_token(cfg.model)));
  if (inst.kv_capacity_tokens < 1) {
    throw ValidationError("instance.kv_capacity_bytes",
                          "holds less than one token");
  }
  instances_.push_back(std::move(inst));
  inflight_decodes_.emplace_back();
  inflight_chunks_.emplace_back();
  return instances_.back().id;
}

void Simulator::retire_instance(InstanceId id) {
  InstanceState& inst = mut_instance(id);
  inst.retiring = true;
  maybe_retire(inst);
}

void Simulator::assign_prefill(InstanceId id, RequestId req) {
  InstanceState& inst = mut_instance(id);
  RequestState& st = states_.at(static_cast<std::size_t>(req));
  if (st.where != Location::kUnrouted) {
    throw InvariantViolation("request " + std::to_string(req) +
                             " routed twice or before arrival");
  }
  if (inst.mode == InstanceMode::kDecodeOnly) {
    throw ValidationError(
        "routing",
        "decode-only instance " + std::to_string(id) + " cannot take prompts");
  }
  if (inst.retiring || inst.retired_at == inst.retired_at) {
    throw ValidationError("routing",
                          "instance " + std::to_string(id) + " is retiring");
  }
  RequestRecord& rec = records_[static_cast<std::size_t>(req)];
  rec.routed_instance = id;
  rec.routed_time = now_;
  st.where = Location::kPending;
  st.instance = id;
  st.prefill_target = rec.input_len;
  st.prefill_done = 0;
  inst.pending_prefills.push_back(req);
  if (inst.mode != InstanceMode::kHybrid) {
    set_phase(inst, Phase::kPrefill);
  }
  process(id);
}

void Simulator::handoff(RequestId req, InstanceId decode_instance) {
  RequestState& st = states_.at(static_cast<std::size_t>(req));
  if (st.where != Location::kOutbound) {
    throw InvariantViolation("handoff of request " + std::to_string(req) +
                             " that is not waiting for transfer");
  }
  InstanceState& dst = mut_instance(decode_instance);
  if (dst.mode != InstanceMode::kDecodeOnly) {
    throw ValidationError(
        "handoff",
        "instance " + std::to_string(decode_instance) + " is not decode-only");
  }
  InstanceState& src = mut_instance(st.instance);
  erase_value(src.outbound, req);
  src.kv_used_tokens -= st.kv_tokens;
  st.kv_tokens = 0;
  st.where = Location::kIncoming;
  st.instance = decode_instance;
  dst.incoming.push_back(req);
  records_[static_cast<std::size_t>(req)].decode_instance = decode_instance;
  notify(src.id);
  process(src.id);
  process(decode_instance);
}

void Simulator::schedule(double time, EventKind kind, std::int64_t a,
                         std::int64_t b, std::uint64_t token) {
  if (!(time >= now_)) {
    throw InvariantViolation("event scheduled in the past");
  }
  queue_.push(Event{time, next_seq_++, kind, a, b, token});
}

const InstanceState& Simulator::instance(InstanceId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= instances_.size()) {
    throw ValidationError("instance", "unknown id " + std::to_string(id));
  }
  return instances_[static_cast<std::size_t>(id)];
}

InstanceState& Simulator::mut_instance(InstanceId id) {
  return const_cast<InstanceState&>(
      static_cast<const Simulator*>(this)->instance(id));
}

const RequestRecord& Simulator::record(RequestId id) const {
  return records_.at(static_cast<std::size_t>(id));
}

const Request& Simulator::request(RequestId id) const {
  return requests_.at(static_cast<std::size_t>(id));
}

std::int64_t Simulator::kv_tokens(RequestId id) const {
  return states_.at(static_cast<std::size_t>(id)).kv_tokens;
}

std::int64_t Simulator::remaining_prefill_tokens(RequestId id) const {
  const RequestState& st = states_.at(static_cast<std::size_t>(id));
  switch (st.where) {
    case Location::kNotArrived:
    case Location::kUnrouted:
      return requests_[static_cast<std::size_t>(id)].input_len;
    case Location::kPending:
      return st.prefill_target - st.prefill_done;
    default:
      return 0;
  }
}

bool Simulator::has_outstanding_work() const {
  return finished_ < requests_.size();
}

// --- event handling ---------------------------------------------------------

void Simulator::handle(const Event& ev) {
  switch (ev.kind) {
    case EventKind::kArrival: {
      RequestState& st = states_.at(static_cast<std::size_t>(ev.a));
      st.where = Location::kUnrouted;
      ++arrived_;
      strategy_.on_arrival(*this, ev.a);
      return;
    }
    case EventKind::kPrefillBatchDone: {
      InstanceState& inst = mut_instance(static_cast<InstanceId>(ev.a));
      finish_prefill_batch(inst);
      return;
    }
    case EventKind::kDecodeStepDone: {
      InstanceState& inst = mut_instance(static_cast<InstanceId>(ev.a));
      finish_decode_iteration(inst);
      return;
    }
    default:
      strategy_.on_event(*this, ev);
      return;
  }
}

void Simulator::process(InstanceId id) {
  InstanceState& inst = mut_instance(id);
  if (inst.busy || inst.retired_at == inst.retired_at) {
    return;
  }
  switch (inst.mode) {
    case InstanceMode::kHybrid:
      if (try_start_hybrid_iteration(inst)) {
        return;
      }
      // Partially prefilled prompts can hold all memory while nothing
      // decodes. Restart the later ones so the front prompt can finish.
      if (release_partial_prefills(inst, 1) &&
          try_start_hybrid_iteration(inst)) {
        return;
      }
      if (!inst.pending_prefills.empty()) {
        throw CapacityError("prompt of request " +
                            std::to_string(inst.pending_prefills.front()) +
                            " cannot fit instance " + std::to_string(id));
      }
      set_phase(inst, Phase::kIdle);
      maybe_retire(inst);
      return;

    case InstanceMode::kPrefillOnly:
      if (!inst.pending_prefills.empty()) {
        if (try_start_prefill_batch(inst)) {
          return;
        }
        if (inst.outbound.empty()) {
          throw CapacityError("prompt of request " +
                              std::to_string(inst.pending_prefills.front()) +
                              " cannot fit instance " + std::to_string(id));
        }
        return;  // waits for transfers to free memory
      }
      set_phase(inst, Phase::kIdle);
      maybe_retire(inst);
      return;

    case InstanceMode::kSeparate:
    case InstanceMode::kDecodeOnly:
      break;
  }

  if (inst.mode == InstanceMode::kDecodeOnly) {
    admit_incoming(inst);
  }
  if (!inst.pending_prefills.empty()) {
    if (try_start_prefill_batch(inst)) {
      return;
    }
    // Memory-blocked window: let the finished prompts decode so KV drains.
    for (RequestId r : inst.prefilled) {
      states_[static_cast<std::size_t>(r)].where = Location::kDecoding;
      inst.active_decodes.push_back(r);
    }
    inst.prefilled.clear();
  } else if (!inst.prefilled.empty()) {
    end_prefill_window(inst);
  }
  if (try_start_decode_iteration(inst)) {
    return;
  }
  if (!inst.pending_prefills.empty()) {
    // Decoding made room by preemption, or nothing can ever free memory.
    if (try_start_prefill_batch(inst)) {
      return;
    }
    throw CapacityError("prompt of request " +
                        std::to_string(inst.pending_prefills.front()) +
                        " cannot fit instance " + std::to_string(id));
  }
  if (!inst.incoming.empty()) {
    throw CapacityError("request " + std::to_string(inst.incoming.front()) +
                        " cannot fit decode instance " + std::to_string(id));
  }
  set_phase(inst, Phase::kIdle);
  maybe_retire(inst);
}

bool Simulator::try_start_prefill_batch(InstanceState& inst) {
  std::int64_t free = inst.kv_capacity_tokens - inst.kv_used_tokens;
  std::int64_t budget = options_.max_prefill_batch_tokens;
  std::vector<InflightChunk>& batch =
      inflight_chunks_[static_cast<std::size_t>(inst.id)];
  batch.clear();
  std::vector<PrefillChunk> shape;
  for (RequestId r : inst.pending_prefills) {
    const RequestState& st = states_[static_cast<std::size_t>(r)];
    const std::int64_t remaining = st.prefill_target - st.prefill_done;
    const std::int64_t take = std::min(remaining, budget);
    if (take < 1 || take > free) {
      break;
    }
    batch.push_back({r, take});
    shape.push_back({take, st.prefill_done});
    budget -= take;
    free -= take;
    if (take < remaining) {
      break;
    }
  }
  if (batch.empty()) {
    return false;
  }
  double duration = prefill_chunks_time(inst.cfg, shape);
  if (inst.last_work == Phase::kDecode) {
    duration += inst.cfg.switch_overhead;
  }
  set_phase(inst, Phase::kPrefill);
  begin_work(inst, Phase::kPrefill, duration, EventKind::kPrefillBatchDone);
  return true;
}

bool Simulator::ensure_decode_headroom(InstanceState& inst,
                                       std::int64_t extra_tokens) {
  if (inst.mode == InstanceMode::kHybrid &&
      inst.kv_used_tokens + extra_tokens +
              static_cast<std::int64_t>(inst.active_decodes.size()) >
          inst.kv_capacity_tokens) {
    // Unfinished prompts give their memory back before any decode does.
    release_partial_prefills(inst, 0);
  }
  while (!inst.active_decodes.empty() &&
         inst.kv_used_tokens + extra_tokens +
                 static_cast<std::int64_t>(inst.active_decodes.size()) >
             inst.kv_capacity_tokens) {
    preempt(inst, inst.active_decodes.back());
  }
  return !inst.active_decodes.empty();
}

void Simulator::preempt(InstanceState& inst, RequestId req) {
  RequestState& st = states_[static_cast<std::size_t>(req)];
  RequestRecord& rec = records_[static_cast<std::size_t>(req)];
  erase_value(inst.active_decodes, req);
  inst.kv_used_tokens -= st.kv_tokens;
  st.kv_tokens = 0;
  st.where = Location::kPending;
  st.prefill_target = rec.input_len + rec.tokens_generated;
  st.prefill_done = 0;
  st.gen_base = rec.tokens_generated;
  st.recompute = true;
  inst.pending_prefills.push_front(req);
  ++rec.preemptions;
  ++preemptions_;
  if (inst.mode != InstanceMode::kHybrid) {
    set_phase(inst, Phase::kPrefill);
  }
}

bool Simulator::try_start_decode_iteration(InstanceState& inst) {
  if (!ensure_decode_headroom(inst, 0)) {
    return false;
  }
  std::int64_t kv_total = 0;
  for (RequestId r : inst.active_decodes) {
    kv_total += states_[static_cast<std::size_t>(r)].kv_tokens;
    RequestRecord& rec = records_[static_cast<std::size_t>(r)];
    if (std::isnan(rec.decode_begin_time)) {
      rec.decode_begin_time = now_;
    }
  }
  const auto batch = static_cast<std::int64_t>(inst.active_decodes.size());
  double duration = decode_step_time(inst.cfg, batch, kv_total);
  if (inst.last_work == Phase::kPrefill) {
    duration += inst.cfg.switch_overhead;
  }
  if (inst.pending_prefills.empty()) {
    set_phase(inst, Phase::kDecode);
  }
  inflight_decodes_[static_cast<std::size_t>(inst.id)] = inst.active_decodes;
  inflight_chunks_[static_cast<std::size_t>(inst.id)].clear();
  begin_work(inst, Phase::kDecode, duration, EventKind::kDecodeStepDone);
  return true;
}

bool Simulator::try_start_hybrid_iteration(InstanceState& inst) {
  ensure_decode_headroom(inst, 0);
  const auto batch = static_cast<std::int64_t>(inst.active_decodes.size());
  std::int64_t budget = options_.token_budget - batch;
  std::int64_t free = inst.kv_capacity_tokens - inst.kv_used_tokens - batch;
  std::vector<InflightChunk>& chunks =
      inflight_chunks_[static_cast<std::size_t>(inst.id)];
  chunks.clear();
  std::vector<PrefillChunk> shape;
  for (RequestId r : inst.pending_prefills) {
    const RequestState& st = states_[static_cast<std::size_t>(r)];
    const std::int64_t remaining = st.prefill_target - st.prefill_done;
    // A prompt starts only if all of it and its first decode token fit; one
    // already started may use whatever is left.
    if (st.prefill_done == 0 && remaining + 1 > free) {
      break;
    }
    const std::int64_t take =
        std::min({remaining, options_.chunk_size, budget, free});
    if (take < 1) {
      break;
    }
    chunks.push_back({r, take});
    shape.push_back({take, st.prefill_done});
    budget -= take;
    free -= take;
  }
  if (batch == 0 && chunks.empty()) {
    return false;
  }
  std::int64_t kv_total = 0;
  for (RequestId r : inst.active_decodes) {
    kv_total += states_[static_cast<std::size_t>(r)].kv_tokens;
    RequestRecord& rec = records_[static_cast<std::size_t>(r)];
    if (std::isnan(rec.decode_begin_time)) {
      rec.decode_begin_time = now_;
    }
  }
  const double duration =
      hybrid_iteration_time(inst.cfg, batch, kv_total, shape);
  const Phase work = batch > 0 ? Phase::kDecode : Phase::kPrefill;
  set_phase(inst, work);
  inflight_decodes_[static_cast<std::size_t>(inst.id)] = inst.active_decodes;
  begin_work(inst, work, duration, EventKind::kDecodeStepDone);
  return true;
}

bool Simulator::release_partial_prefills(InstanceState& inst,
                                         std::size_t from) {
  bool released = false;
  for (std::size_t i = from; i < inst.pending_prefills.size(); ++i) {
    RequestState& st =
        states_[static_cast<std::size_t>(inst.pending_prefills[i])];
    if (st.kv_tokens == 0) {
      continue;
    }
    inst.kv_used_tokens -= st.kv_tokens;
    st.kv_tokens = 0;
    st.prefill_done = 0;
    released = true;
  }
  return released;
}

void Simulator::admit_incoming(InstanceState& inst) {
  while (!inst.incoming.empty()) {
    const RequestId r = inst.incoming.front();
    RequestState& st = states_[static_cast<std::size_t>(r)];
    const RequestRecord& rec = records_[static_cast<std::size_t>(r)];
    const std::int64_t need = rec.input_len + rec.tokens_generated;
    const auto batch = static_cast<std::int64_t>(inst.active_decodes.size());
    if (inst.kv_used_tokens + need + batch + 1 > inst.kv_capacity_tokens) {
      return;
    }
    inst.incoming.pop_front();
    st.where = Location::kDecoding;
    st.prefill_target = need;
    st.prefill_done = need;
    st.gen_base = rec.tokens_generated;
    inst.active_decodes.push_back(r);
    charge(inst, r, need);
  }
}

void Simulator::finish_prefill_batch(InstanceState& inst) {
  end_work(inst);
  std::vector<InflightChunk> batch;
  batch.swap(inflight_chunks_[static_cast<std::size_t>(inst.id)]);
  for (const InflightChunk& c : batch) {
    RequestState& st = states_[static_cast<std::size_t>(c.req)];
    RequestRecord& rec = records_[static_cast<std::size_t>(c.req)];
    st.prefill_done += c.tokens;
    charge(inst, c.req, c.tokens);
    if (st.prefill_done < st.prefill_target) {
      continue;
    }
    erase_value(inst.pending_prefills, c.req);
    if (!st.recompute) {
      rec.prefill_end_time = now_;
    }
    if (inst.mode == InstanceMode::kPrefillOnly) {
      st.where = Location::kOutbound;
      inst.outbound.push_back(c.req);
      callbacks_.push_back({Callback::Kind::kPrefillComplete, inst.id, c.req});
    } else {
      st.where = Location::kPrefilled;
      inst.prefilled.push_back(c.req);
    }
  }
  if (inst.mode != InstanceMode::kPrefillOnly &&
      inst.pending_prefills.empty()) {
    end_prefill_window(inst);
  }
  notify(inst.id);
  process(inst.id);
}

void Simulator::end_prefill_window(InstanceState& inst) {
  for (RequestId r : inst.prefilled) {
    states_[static_cast<std::size_t>(r)].where = Location::kDecoding;
    inst.active_decodes.push_back(r);
  }
  inst.prefilled.clear();
  set_phase(inst, inst.active_decodes.empty() ? Phase::kIdle : Phase::kDecode);
}

void Simulator::finish_decode_iteration(InstanceState& inst) {
  end_work(inst);
  const auto idx = static_cast<std::size_t>(inst.id);
  std::vector<RequestId> decodes;
  decodes.swap(inflight_decodes_[idx]);
  std::vector<InflightChunk> chunks;
  chunks.swap(inflight_chunks_[idx]);

  for (RequestId r : decodes) {
    RequestRecord& rec = records_[static_cast<std::size_t>(r)];
    ++rec.tokens_generated;
    charge(inst, r, 1);
    if (rec.tokens_generated >= rec.true_output_len) {
      complete_request(inst, r);
    }
  }
  for (const InflightChunk& c : chunks) {
    RequestState& st = states_[static_cast<std::size_t>(c.req)];
    st.prefill_done += c.tokens;
    charge(inst, c.req, c.tokens);
    if (st.prefill_done < st.prefill_target) {
      continue;
    }
    erase_value(inst.pending_prefills, c.req);
    RequestRecord& rec = records_[static_cast<std::size_t>(c.req)];
    if (!st.recompute) {
      rec.prefill_end_time = now_;
    }
    st.where = Location::kDecoding;
    inst.active_decodes.push_back(c.req);
  }
  notify(inst.id);
  process(inst.id);
}

void Simulator::complete_request(InstanceState& inst, RequestId id) {
  RequestState& st = states_[static_cast<std::size_t>(id)];
  erase_value(inst.active_decodes, id);
  inst.kv_used_tokens -= st.kv_tokens;
  st.kv_tokens = 0;
  st.where = Location::kDone;
  records_[static_cast<std::size_t>(id)].completion_time = now_;
  ++finished_;
  callbacks_.push_back({Callback::Kind::kRequestComplete, inst.id, id});
}

void Simulator::charge(InstanceState& inst, RequestId id, std::int64_t tokens) {
  inst.kv_used_tokens += tokens;
  states_[static_cast<std::size_t>(id)].kv_tokens += tokens;
  if (inst.kv_used_tokens > inst.kv_capacity_tokens) {
    throw CapacityError("instance " + std::to_string(inst.id) +
                        " KV overflow: " + std::to_string(inst.kv_used_tokens) +
                        " > " + std::to_string(inst.kv_capacity_tokens) +
                        " tokens");
  }
}

void Simulator::set_phase(InstanceState& inst, Phase phase) {
  if (inst.phase == phase) {
    return;
  }
  inst.phase = phase;
  inst.t_switch = now_;
  ++inst.status_seq;
  notify(inst.id);
}

void Simulator::begin_work(InstanceState& inst, Phase work, double duration,
                           EventKind done_kind) {
  inst.busy = true;
  inst.busy_since = now_;
  inst.last_work = work;
  schedule(now_ + duration, done_kind, inst.id);
}

void Simulator::end_work(InstanceState& inst) {
  inst.busy = false;
  inst.busy_time += now_ - inst.busy_since;
  busy_intervals_.push_back({inst.id, inst.busy_since, now_, inst.last_work});
  ++inst.status_seq;
}

void Simulator::maybe_retire(InstanceState& inst) {
  if (inst.retiring && !inst.busy && inst.resident_count() == 0 &&
      std::isnan(inst.retired_at)) {
    inst.retired_at = now_;
    notify(inst.id);
  }
}

void Simulator::notify(InstanceId id) {
  callbacks_.push_back({Callback::Kind::kInstance, id, -1});
}

void Simulator::drain_callbacks() {
  while (!callbacks_.empty()) {
    const Callback cb = callbacks_.front();
    callbacks_.pop_front();
    switch (cb.kind) {
      case Callback::Kind::kInstance:
        // Collapse repeated notifications for the same instance.
        if (std::find_if(callbacks_.begin(), callbacks_.end(),
                         [&](const Callback& other) {
                           return other.kind == Callback::Kind::kInstance &&
                                  other.instance == cb.instance;
                         }) != callbacks_.end()) {
          continue;
        }
        strategy_.on_instance_event(*this, cb.instance);
        break;
      case Callback::Kind::kPrefillComplete:
        strategy_.on_prefill_complete(*this, cb.instance, cb.req);
        break;
      case Callback::Kind::kRequestComplete:
        strategy_.on_request_complete(*this, cb.instance, cb.req);
        break;
    }
  }
}

void Simulator::verify_invariants() const {
  std::vector<std::int64_t> held(instances_.size(), 0);
  std::vector<int> seen(requests_.size(), 0);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const RequestState& st = states_[i];
    const RequestRecord& rec = records_[i];
    if (st.kv_tokens < 0) {
      throw InvariantViolation("negative KV for request " + std::to_string(i));
    }
    if (st.kv_tokens > 0) {
      held[static_cast<std::size_t>(st.instance)] += st.kv_tokens;
    }
    if (st.where == Location::kPending || st.where == Location::kPrefilled ||
        st.where == Location::kDecoding || st.where == Location::kOutbound) {
      const std::int64_t expect =
          st.prefill_done + (rec.tokens_generated - st.gen_base);
      if (st.kv_tokens != expect) {
        throw InvariantViolation("request " + std::to_string(i) + " holds " +
                                 std::to_string(st.kv_tokens) +
                                 " KV tokens, expected " +
                                 std::to_string(expect));
      }
    }
    if (rec.tokens_generated > rec.true_output_len) {
      throw InvariantViolation("request " + std::to_string(i) +
                               " generated past its output length");
    }
  }
  auto mark = [&](auto const& container, InstanceId inst, Location where) {
    for (RequestId r : container) {
      const RequestState& st = states_[static_cast<std::size_t>(r)];
      if (++seen[static_cast<std::size_t>(r)] > 1 || st.instance != inst ||
          st.where != where) {
        throw InvariantViolation("request " + std::to_string(r) +
                                 " misplaced on instance " +
                                 std::to_string(inst));
      }
    }
  };
  for (const InstanceState& inst : instances_) {
    const auto idx = static_cast<std::size_t>(inst.id);
    if (held[idx] != inst.kv_used_tokens) {
      throw InvariantViolation("instance " + std::to_string(inst.id) + " KV " +
                               std::to_string(inst.kv_used_tokens) +
                               " != sum of residents " +
                               std::to_string(held[idx]));
    }
    if (inst.kv_used_tokens > inst.kv_capacity_tokens) {
      throw InvariantViolation("instance " + std::to_string(inst.id) +
                               " over KV capacity");
    }
    mark(inst.pending_prefills, inst.id, Location::kPending);
    mark(inst.prefilled, inst.id, Location::kPrefilled);
    mark(inst.active_decodes, inst.id, Location::kDecoding);
    mark(inst.incoming, inst.id, Location::kIncoming);
    mark(inst.outbound, inst.id, Location::kOutbound);
    if (!inst.busy && inst.mode != InstanceMode::kPrefillOnly &&
        (!inst.pending_prefills.empty() || !inst.active_decodes.empty() ||
         !inst.prefilled.empty())) {
      throw InvariantViolation("instance " + std::to_string(inst.id) +
                               " idle with queued work");
    }
  }
}

}  // namespace padg
