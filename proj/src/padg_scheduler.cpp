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

#include "padgsim/padg_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "padgsim/errors.hpp"
#include "padgsim/metrics.hpp"

namespace padg {

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::kNone:
      return "none";
    case Constraint::kTtft:
      return "ttft";
    case Constraint::kTpot:
      return "tpot";
    case Constraint::kKvCapacity:
      return "kv";
  }
  return "?";
}

Constraint ConstraintResult::failed() const {
  if (!ttft_ok) {
    return Constraint::kTtft;
  }
  if (!tpot_ok) {
    return Constraint::kTpot;
  }
  if (!kv_ok) {
    return Constraint::kKvCapacity;
  }
  return Constraint::kNone;
}

std::string ProbeOutcome::str() const {
  std::string out = std::to_string(instance) + ":";
  if (!available) {
    return out + "unavailable";
  }
  if (ok()) {
    return out + "ok";
  }
  std::string failed;
  auto add = [&](bool ok, const char* name) {
    if (!ok) {
      failed += failed.empty() ? "" : "+";
      failed += name;
    }
  };
  add(ttft_ok, "ttft");
  add(tpot_ok, "tpot");
  add(kv_ok, "kv");
  return out + "fail(" + failed + ")";
}

void write_routing_log(std::ostream& out,
                       const std::vector<RoutingLogEntry>& log) {
  out << "time,request_id,macro_id,instance_id,constraints\n";
  for (const RoutingLogEntry& e : log) {
    out << format_double(e.time) << ',' << e.request << ',' << e.macro << ','
        << e.instance << ',';
    for (std::size_t i = 0; i < e.probes.size(); ++i) {
      out << (i ? "|" : "") << e.probes[i].str();
    }
    out << '\n';
  }
}

ConstraintResult check_constraints(const InstanceStatus& status,
                                   std::int64_t input_len, const SloConfig& slo,
                                   const AdmissionParams& params,
                                   const PrefillPredictor& predict,
                                   double now) {
  if (now - status.snapshot_time > params.staleness_bound) {
    throw StaleStatus("status of instance " + std::to_string(status.instance) +
                      " is " + format_double(now - status.snapshot_time) +
                      " s old");
  }
  const double t_switch =
      status.phase == Phase::kPrefill ? status.t_switch : now;

  ConstraintResult r;
  r.t_total = predict(input_len);
  double saved = 0.0;
  double min_saved = std::numeric_limits<double>::infinity();
  for (const StatusRequest& q : status.requests) {
    if (q.routed_time >= t_switch) {
      r.t_total += predict(q.input_len);
    } else if (!std::isnan(q.first_token_time) &&
               q.first_token_time <= t_switch) {
      const double s = static_cast<double>(q.tokens_generated) * slo.tpot -
                       (now - q.first_token_time);
      saved += s;
      min_saved = std::min(min_saved, s);
      ++r.decode_count;
    }
  }
  r.ttft_ok = r.t_total <= slo.ttft;
  if (r.decode_count > 0) {
    r.mean_saved = saved / static_cast<double>(r.decode_count);
    r.tpot_ok =
        (params.tpot_check == TpotCheck::kMin ? min_saved : r.mean_saved) >=
        r.t_total;
  } else {
    r.mean_saved = kNever;
  }
  r.kv_need =
      static_cast<double>(input_len + params.output_reservation_tokens) *
      params.kv_bytes_per_token;
  r.kv_ok = r.kv_need <= status.kv_capacity - status.kv_used;
  return r;
}

RouteDecision inter_schedule(MacroInstance& macro, std::int64_t input_len,
                             const StatusMap& statuses, const SloConfig& slo,
                             const AdmissionParams& params,
                             const PrefillPredictor& predict, double now) {
  RouteDecision d;
  const std::size_t n = macro.instances.size();
  if (n == 0) {
    return d;
  }
  if (macro.prev_idx >= n) {
    macro.prev_idx = 0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = (macro.prev_idx + k) % n;
    const InstanceId id = macro.instances[idx];
    ProbeOutcome probe;
    probe.instance = id;
    auto it = statuses.find(id);
    if (it == statuses.end()) {
      probe.available = false;
      d.probes.push_back(probe);
      continue;
    }
    const ConstraintResult r =
        check_constraints(it->second, input_len, slo, params, predict, now);
    probe.ttft_ok = r.ttft_ok;
    probe.tpot_ok = r.tpot_ok;
    probe.kv_ok = r.kv_ok;
    d.probes.push_back(probe);
    if (r.satisfied()) {
      macro.prev_idx = idx;
      d.instance = id;
      return d;
    }
  }
  return d;
}

IntraAction intra_policy(const InstanceState& inst) {
  if (!inst.pending_prefills.empty()) {
    return IntraAction::kStartPrefillWindow;
  }
  if (!inst.active_decodes.empty() || !inst.prefilled.empty()) {
    return IntraAction::kContinueDecode;
  }
  return IntraAction::kIdle;
}

// --- PadgStrategy ------------------------------------------------------------

PadgStrategy::PadgStrategy(InstanceConfig cfg, SloConfig slo, PadgParams params,
                           std::optional<ScalingPolicy> scaling,
                           std::vector<ScriptedScale> script)
    : cfg_(std::move(cfg)),
      slo_(slo),
      params_(std::move(params)),
      scaling_(std::move(scaling)),
      script_(std::move(script)) {
  cfg_.validate();
  slo_.validate();
  if (params_.macro_sizes.empty()) {
    throw ValidationError("strategy.params.macro_sizes", "must not be empty");
  }
  for (int s : params_.macro_sizes) {
    if (s < 1) {
      throw ValidationError("strategy.params.macro_sizes",
                            "every macro needs >= 1 instance");
    }
  }
  if (!(params_.status_period > 0.0)) {
    throw ValidationError("strategy.params.status_period", "must be > 0");
  }
  if (!(params_.staleness_bound >= params_.status_period)) {
    throw ValidationError("strategy.params.staleness_bound",
                          "must be >= status_period");
  }
  if (params_.output_reservation_tokens < 0) {
    throw ValidationError("strategy.params.output_reservation_tokens",
                          "must be >= 0");
  }
  if (scaling_) {
    scaling_->validate();
  }
  if (!script_.empty() && !scaling_) {
    scaling_ = ScalingPolicy{};
  }
  admission_.output_reservation_tokens = params_.output_reservation_tokens;
  admission_.kv_bytes_per_token = kv_bytes_per_token(cfg_.model);
  admission_.staleness_bound = params_.staleness_bound;
  admission_.tpot_check = params_.tpot_check;
}

void PadgStrategy::start(Simulator& sim) {
  for (int size : params_.macro_sizes) {
    const int m = create_macro();
    for (int i = 0; i < size; ++i) {
      create_instance(sim, m);
    }
  }
  for (const auto& [id, member] : members_) {
    refresh(sim, id);
  }
  sim.schedule(sim.now() + params_.status_period, EventKind::kStatusUpdate);
  if (scaling_) {
    sim.schedule(sim.now() + scaling_->check_period, EventKind::kScaleCheck, 0);
  }
  for (std::size_t i = 0; i < script_.size(); ++i) {
    sim.schedule(std::max(script_[i].at, sim.now()), EventKind::kScaleCheck, 1,
                 static_cast<std::int64_t>(i));
  }
}

int PadgStrategy::create_macro() {
  Macro m;
  m.state.id = static_cast<int>(macros_.size());
  macros_.push_back(std::move(m));
  return macros_.back().state.id;
}

InstanceId PadgStrategy::create_instance(Simulator& sim, int macro) {
  const InstanceId id = sim.add_instance(cfg_, InstanceMode::kSeparate);
  Member m;
  m.owner = macro;
  m.target = macro;
  m.routable_at =
      sim.now() + (sim.now() > 0.0 && scaling_ ? scaling_->warmup : 0.0);
  m.order = ++join_counter_;
  m.handler.actor_id = static_cast<std::uint64_t>(id);
  m.handler.worker_address = "worker-" + std::to_string(id);
  m.handler.model = cfg_.model.name;
  m.handler.device = cfg_.device.name;
  m.handler.tp_degree = static_cast<std::uint32_t>(cfg_.tp_degree);
  members_[id] = m;
  macros_[static_cast<std::size_t>(macro)].state.instances.push_back(id);
  return id;
}

bool PadgStrategy::routable(const Simulator& sim, InstanceId id) const {
  auto it = members_.find(id);
  if (it == members_.end()) {
    return false;
  }
  const Member& m = it->second;
  return !m.migrating && !m.retiring && sim.now() >= m.routable_at;
}

InstanceStatus PadgStrategy::snapshot(const Simulator& sim,
                                      InstanceId id) const {
  const InstanceState& inst = sim.instance(id);
  InstanceStatus s;
  s.instance = id;
  s.snapshot_time = sim.now();
  s.phase = inst.phase;
  s.t_switch = inst.t_switch;
  s.kv_capacity = inst.kv_capacity_bytes();
  std::int64_t committed = 0;
  auto add = [&](RequestId r) {
    const RequestRecord& rec = sim.record(r);
    s.requests.push_back({r, rec.routed_time, rec.input_len,
                          rec.prefill_end_time, rec.tokens_generated});
    committed += rec.input_len + std::max(rec.tokens_generated,
                                          admission_.output_reservation_tokens);
  };
  for (RequestId r : inst.pending_prefills) {
    add(r);
  }
  for (RequestId r : inst.prefilled) {
    add(r);
  }
  for (RequestId r : inst.active_decodes) {
    add(r);
  }
  s.kv_used = static_cast<double>(committed) * admission_.kv_bytes_per_token;
  return s;
}

void PadgStrategy::refresh(const Simulator& sim, InstanceId id) {
  if (routable(sim, id)) {
    statuses_[id] = snapshot(sim, id);
  } else {
    statuses_.erase(id);
  }
}

double PadgStrategy::predict(std::int64_t input_len) {
  auto it = predict_cache_.find(input_len);
  if (it != predict_cache_.end()) {
    return it->second;
  }
  const double t = prefill_time(cfg_, input_len);
  predict_cache_.emplace(input_len, t);
  return t;
}

void PadgStrategy::amend(InstanceId id, RequestId req, const Simulator& sim) {
  auto it = statuses_.find(id);
  if (it == statuses_.end()) {
    return;
  }
  InstanceStatus& s = it->second;
  const RequestRecord& rec = sim.record(req);
  s.requests.push_back({req, sim.now(), rec.input_len, kNever, 0});
  s.kv_used += static_cast<double>(rec.input_len +
                                   admission_.output_reservation_tokens) *
               admission_.kv_bytes_per_token;
  if (s.phase != Phase::kPrefill) {
    s.phase = Phase::kPrefill;
    s.t_switch = sim.now();
  }
}

int PadgStrategy::pick_macro(const Simulator& sim) {
  // Smooth weighted round-robin, weighted by routable instances.
  double total = 0.0;
  int best = -1;
  int first_alive = -1;
  for (Macro& m : macros_) {
    if (!m.alive) {
      continue;
    }
    if (first_alive < 0) {
      first_alive = m.state.id;
    }
    double w = 0.0;
    for (InstanceId id : m.state.instances) {
      if (routable(sim, id)) {
        w += 1.0;
      }
    }
    m.wrr_current += w;
    total += w;
    if (w > 0.0 &&
        (best < 0 ||
         m.wrr_current > macros_[static_cast<std::size_t>(best)].wrr_current)) {
      best = m.state.id;
    }
  }
  if (best < 0) {
    return first_alive;
  }
  macros_[static_cast<std::size_t>(best)].wrr_current -= total;
  return best;
}

void PadgStrategy::on_arrival(Simulator& sim, RequestId id) {
  const int m = pick_macro(sim);
  if (m < 0) {
    throw InvariantViolation("no live macro instance");
  }
  macros_[static_cast<std::size_t>(m)].state.macro_queue.push_back(id);
  drain_queue(sim, m);
}

void PadgStrategy::drain_queue(Simulator& sim, int macro) {
  Macro& m = macros_[static_cast<std::size_t>(macro)];
  const PrefillPredictor predictor = [this](std::int64_t len) {
    return predict(len);
  };
  while (!m.state.macro_queue.empty()) {
    const RequestId req = m.state.macro_queue.front();
    const std::int64_t input_len = sim.record(req).input_len;
    RouteDecision d = inter_schedule(m.state, input_len, statuses_, slo_,
                                     admission_, predictor, sim.now());
    if (!d.instance) {
      auto last = last_deferred_.find(macro);
      if (last == last_deferred_.end() || last->second != req) {
        ++deferrals_;
        last_deferred_[macro] = req;
        if (params_.record_routing) {
          routing_log_.push_back(
              {sim.now(), req, macro, kNoInstance, std::move(d.probes)});
        }
      }
      return;
    }
    m.state.macro_queue.pop_front();
    if (params_.record_routing) {
      routing_log_.push_back(
          {sim.now(), req, macro, *d.instance, std::move(d.probes)});
    }
    sim.assign_prefill(*d.instance, req);
    amend(*d.instance, req, sim);
  }
}

void PadgStrategy::on_instance_event(Simulator& sim, InstanceId id) {
  auto it = members_.find(id);
  if (it == members_.end() || it->second.retiring) {
    return;
  }
  refresh(sim, id);
  if (it->second.migration_pending &&
      sim.instance(id).phase != Phase::kPrefill) {
    start_migration(sim, id);
  }
  drain_queue(sim, it->second.owner);
}

void PadgStrategy::on_event(Simulator& sim, const Event& ev) {
  switch (ev.kind) {
    case EventKind::kStatusUpdate:
      for (const auto& [id, member] : members_) {
        if (!member.retiring) {
          refresh(sim, id);
        }
      }
      for (Macro& m : macros_) {
        if (m.alive) {
          drain_queue(sim, m.state.id);
        }
      }
      if (sim.has_outstanding_work()) {
        sim.schedule(sim.now() + params_.status_period,
                     EventKind::kStatusUpdate);
      }
      return;
    case EventKind::kScaleCheck:
      if (ev.a == 1) {
        scale_check(sim, script_[static_cast<std::size_t>(ev.b)].direction);
        return;
      }
      scale_check(sim, std::nullopt);
      if (sim.has_outstanding_work()) {
        sim.schedule(sim.now() + scaling_->check_period, EventKind::kScaleCheck,
                     0);
      }
      return;
    case EventKind::kMigrationDone:
      finish_migration(sim, static_cast<InstanceId>(ev.a));
      return;
    default:
      return;
  }
}

// --- mitosis execution -------------------------------------------------------

std::vector<int> PadgStrategy::live_macro_ids() const {
  std::vector<int> ids;
  for (const Macro& m : macros_) {
    if (!m.alive) {
      continue;
    }
    for (const auto& [id, member] : members_) {
      if (member.target == m.state.id && !member.retiring) {
        ids.push_back(m.state.id);
        break;
      }
    }
  }
  return ids;
}

std::vector<int> PadgStrategy::planned_sizes() const {
  std::vector<int> sizes;
  for (int macro : live_macro_ids()) {
    int n = 0;
    for (const auto& [id, member] : members_) {
      if (member.target == macro && !member.retiring) {
        ++n;
      }
    }
    sizes.push_back(n);
  }
  return sizes;
}

std::vector<const MacroInstance*> PadgStrategy::macros() const {
  std::vector<const MacroInstance*> out;
  for (const Macro& m : macros_) {
    if (m.alive) {
      out.push_back(&m.state);
    }
  }
  return out;
}

ScaleDirection PadgStrategy::decide(Simulator& sim) {
  const ScalingPolicy& p = *scaling_;
  const double now = sim.now();

  // Attainment over requests that arrived in the trailing window and whose
  // outcome is already known.
  const auto records = sim.records();
  auto first = std::lower_bound(
      records.begin(), records.end(), now - p.attainment_window,
      [](const RequestRecord& r, double t) { return r.arrival_time < t; });
  std::size_t known = 0;
  std::size_t ok = 0;
  for (auto it = first; it != records.end() && it->arrival_time <= now; ++it) {
    const int c = classify_at(*it, slo_, now);
    if (c >= 0) {
      ++known;
      ok += static_cast<std::size_t>(c);
    }
  }
  const bool attainment_low =
      known > 0 && static_cast<double>(ok) <
                       p.attainment_target * static_cast<double>(known);

  // Utilization: the larger of the prefill busy share since the last check
  // and the committed KV share, averaged over live instances.
  const auto intervals = sim.busy_intervals();
  for (; busy_scan_pos_ < intervals.size(); ++busy_scan_pos_) {
    const BusyInterval& b = intervals[busy_scan_pos_];
    if (b.work == Phase::kPrefill) {
      prefill_busy_total_[b.instance] += b.end - b.start;
    }
  }
  const double period = std::max(now - last_check_, 1e-9);
  double util_sum = 0.0;
  int live = 0;
  for (const auto& [id, member] : members_) {
    if (member.retiring) {
      continue;
    }
    const double busy = prefill_busy_total_[id] - prefill_busy_seen_[id];
    prefill_busy_seen_[id] = prefill_busy_total_[id];
    const InstanceStatus s = snapshot(sim, id);
    const double kv_share =
        s.kv_capacity > 0.0 ? s.kv_used / s.kv_capacity : 0.0;
    util_sum += std::max(std::min(busy / period, 1.0), kv_share);
    ++live;
  }
  last_check_ = now;
  if (live > 0) {
    utilization_samples_.emplace_back(now, util_sum / live);
  }

  if (now - last_action_ < p.cooldown) {
    return ScaleDirection::kNone;
  }
  if (attainment_low) {
    return ScaleDirection::kExpand;
  }
  // Contract only after the utilization stayed low for the whole sustain
  // window, measured since the last action.
  const double since = std::max(last_action_, 0.0);
  if (now - since < p.utilization_sustain) {
    return ScaleDirection::kNone;
  }
  bool low = false;
  for (auto it = utilization_samples_.rbegin();
       it != utilization_samples_.rend(); ++it) {
    if (it->first < now - p.utilization_sustain) {
      break;
    }
    if (it->second >= p.utilization_threshold) {
      return ScaleDirection::kNone;
    }
    low = true;
  }
  return low ? ScaleDirection::kContract : ScaleDirection::kNone;
}

void PadgStrategy::scale_check(Simulator& sim,
                               std::optional<ScaleDirection> forced) {
  const ScaleDirection dir = forced ? *forced : decide(sim);
  if (dir == ScaleDirection::kNone) {
    return;
  }
  const std::vector<int> ids = live_macro_ids();
  const ScalingAction local = scale_step(planned_sizes(), dir, *scaling_);
  if (local.kind == ScalingKind::kNone) {
    return;
  }
  ScalingAction action = local;
  action.macro = ids[static_cast<std::size_t>(local.macro)];
  if (local.other >= 0) {
    action.other = ids[static_cast<std::size_t>(local.other)];
  }
  apply(sim, action,
        forced
            ? "scripted"
            : (dir == ScaleDirection::kExpand ? "attainment" : "utilization"));
  last_action_ = sim.now();
}

void PadgStrategy::apply(Simulator& sim, const ScalingAction& action,
                         const std::string& reason) {
  ScalingLogEntry entry;
  entry.time = sim.now();
  entry.kind = action.kind;
  entry.sizes_before = planned_sizes();
  entry.reason = reason;

  // Newest members of a macro that can still be moved or removed.
  auto newest = [&](int macro, std::size_t count) {
    std::vector<std::pair<std::uint64_t, InstanceId>> cands;
    for (const auto& [id, member] : members_) {
      if (member.target == macro && member.owner == macro && !member.retiring &&
          !member.migrating && !member.migration_pending) {
        cands.emplace_back(member.order, id);
      }
    }
    std::sort(cands.rbegin(), cands.rend());
    std::vector<InstanceId> out;
    for (std::size_t i = 0; i < cands.size() && i < count; ++i) {
      out.push_back(cands[i].second);
    }
    return out;
  };
  auto remove_one = [&](int macro) {
    const std::vector<InstanceId> pick = newest(macro, 1);
    if (pick.empty()) {
      return false;
    }
    const InstanceId id = pick.front();
    members_[id].retiring = true;
    remove_member(macro, id);
    statuses_.erase(id);
    sim.retire_instance(id);
    return true;
  };

  switch (action.kind) {
    case ScalingKind::kNone:
      return;
    case ScalingKind::kAddInstance:
      refresh(sim, create_instance(sim, action.macro));
      break;
    case ScalingKind::kRemoveInstance:
      if (!remove_one(action.macro)) {
        return;
      }
      break;
    case ScalingKind::kSplit: {
      refresh(sim, create_instance(sim, action.macro));
      const int fresh = create_macro();
      for (InstanceId id :
           newest(action.macro, static_cast<std::size_t>(scaling_->n_lower))) {
        request_migration(sim, id, fresh);
      }
      break;
    }
    case ScalingKind::kMerge: {
      if (!remove_one(action.other)) {
        return;
      }
      std::vector<InstanceId> moving;
      for (const auto& [id, member] : members_) {
        if (member.target == action.other && !member.retiring) {
          moving.push_back(id);
        }
      }
      for (InstanceId id : moving) {
        request_migration(sim, id, action.macro);
      }
      Macro& from = macros_[static_cast<std::size_t>(action.other)];
      Macro& to = macros_[static_cast<std::size_t>(action.macro)];
      for (RequestId r : from.state.macro_queue) {
        to.state.macro_queue.push_back(r);
      }
      from.state.macro_queue.clear();
      maybe_bury(action.other);
      break;
    }
  }
  entry.sizes_after = planned_sizes();
  scaling_log_.push_back(std::move(entry));
  for (Macro& m : macros_) {
    if (m.alive) {
      drain_queue(sim, m.state.id);
    }
  }
}

void PadgStrategy::request_migration(Simulator& sim, InstanceId id,
                                     int to_macro) {
  Member& m = members_.at(id);
  m.target = to_macro;
  MigrationRecord rec;
  rec.instance = id;
  rec.from_macro = m.owner;
  rec.to_macro = to_macro;
  rec.requested = sim.now();
  migrations_.push_back(rec);
  // Hand the instance over between prefill windows.
  if (sim.instance(id).phase == Phase::kPrefill) {
    m.migration_pending = true;
  } else {
    start_migration(sim, id);
  }
}

void PadgStrategy::start_migration(Simulator& sim, InstanceId id) {
  Member& m = members_.at(id);
  m.migration_pending = false;
  m.migrating = true;
  statuses_.erase(id);
  handler_bytes_[id] = serialize(m.handler);
  for (auto it = migrations_.rbegin(); it != migrations_.rend(); ++it) {
    if (it->instance == id && std::isnan(it->finished)) {
      it->started = sim.now();
      break;
    }
  }
  sim.schedule(sim.now() + scaling_->migration_overhead,
               EventKind::kMigrationDone, id);
}

void PadgStrategy::finish_migration(Simulator& sim, InstanceId id) {
  Member& m = members_.at(id);
  const InstanceHandler h = deserialize(handler_bytes_.at(id));
  handler_bytes_.erase(id);
  if (!(h == m.handler)) {
    throw InvariantViolation("instance handler changed in transit");
  }
  const int from = m.owner;
  remove_member(from, id);
  m.owner = m.target;
  m.migrating = false;
  m.order = ++join_counter_;
  macros_[static_cast<std::size_t>(m.owner)].state.instances.push_back(id);
  for (auto it = migrations_.rbegin(); it != migrations_.rend(); ++it) {
    if (it->instance == id && std::isnan(it->finished)) {
      it->finished = sim.now();
      break;
    }
  }
  refresh(sim, id);
  maybe_bury(from);
  drain_queue(sim, m.owner);
}

void PadgStrategy::remove_member(int macro, InstanceId id) {
  MacroInstance& state = macros_[static_cast<std::size_t>(macro)].state;
  auto it = std::find(state.instances.begin(), state.instances.end(), id);
  if (it == state.instances.end()) {
    return;
  }
  const auto idx = static_cast<std::size_t>(it - state.instances.begin());
  state.instances.erase(it);
  if (idx < state.prev_idx) {
    --state.prev_idx;
  }
  if (state.prev_idx >= state.instances.size()) {
    state.prev_idx = 0;
  }
}

void PadgStrategy::maybe_bury(int macro) {
  Macro& m = macros_[static_cast<std::size_t>(macro)];
  if (!m.alive || !m.state.instances.empty()) {
    return;
  }
  for (const auto& [id, member] : members_) {
    if (member.target == macro && !member.retiring) {
      return;
    }
  }
  m.alive = false;
  for (Macro& other : macros_) {
    if (other.alive) {
      for (RequestId r : m.state.macro_queue) {
        other.state.macro_queue.push_back(r);
      }
      m.state.macro_queue.clear();
      break;
    }
  }
}

}  // namespace padg
