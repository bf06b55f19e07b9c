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

#include "padgsim/baselines.hpp"

#include <cmath>
#include <limits>

#include "padgsim/errors.hpp"

namespace padg {

namespace {

// Transfers within a nanosecond of link time count as delivered; absorbs
// round-off in the share arithmetic.
constexpr double kLinkSlackSeconds = 1e-9;

}  // namespace

std::int64_t outstanding_tokens(const Simulator& sim, InstanceId id) {
  const InstanceState& inst = sim.instance(id);
  std::int64_t total = 0;
  for (RequestId r : inst.pending_prefills) {
    total += sim.remaining_prefill_tokens(r) + sim.kv_tokens(r);
  }
  for (RequestId r : inst.prefilled) {
    total += sim.kv_tokens(r);
  }
  for (RequestId r : inst.active_decodes) {
    total += sim.kv_tokens(r);
  }
  for (RequestId r : inst.outbound) {
    total += sim.kv_tokens(r);
  }
  for (RequestId r : inst.incoming) {
    const RequestRecord& rec = sim.record(r);
    total += rec.input_len + rec.tokens_generated;
  }
  return total;
}

// --- NoDG --------------------------------------------------------------------

NodgStrategy::NodgStrategy(InstanceConfig cfg, int instances, InstanceMode mode,
                           bool record_routing)
    : cfg_(std::move(cfg)),
      count_(instances),
      mode_(mode),
      record_routing_(record_routing) {
  cfg_.validate();
  if (count_ < 1) {
    throw ValidationError("cluster.instances", "must be >= 1");
  }
  if (mode_ != InstanceMode::kSeparate && mode_ != InstanceMode::kHybrid) {
    throw ValidationError("strategy.name", "NoDG runs separate or hybrid");
  }
}

std::string NodgStrategy::name() const {
  return mode_ == InstanceMode::kHybrid ? "nodg-hybrid" : "nodg-separate";
}

void NodgStrategy::start(Simulator& sim) {
  if (mode_ == InstanceMode::kHybrid &&
      sim.options().chunk_size > sim.options().token_budget) {
    throw ValidationError("strategy.params.chunk_size",
                          "must not exceed token_budget");
  }
  for (int i = 0; i < count_; ++i) {
    ids_.push_back(sim.add_instance(cfg_, mode_));
  }
}

void NodgStrategy::on_arrival(Simulator& sim, RequestId id) {
  InstanceId best = ids_.front();
  std::int64_t best_load = std::numeric_limits<std::int64_t>::max();
  for (InstanceId i : ids_) {
    const std::int64_t load = outstanding_tokens(sim, i);
    if (load < best_load) {
      best = i;
      best_load = load;
    }
  }
  if (record_routing_) {
    routing_log_.push_back({sim.now(), id, 0, best, {}});
  }
  sim.assign_prefill(best, id);
}

// --- shared link -------------------------------------------------------------

SharedLink::SharedLink(double bandwidth) : bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0)) {
    throw ValidationError("strategy.params.link_bandwidth", "must be > 0");
  }
}

void SharedLink::advance(double now) {
  if (now < clock_) {
    throw InvariantViolation("link clock moved backwards");
  }
  if (!remaining_.empty()) {
    const double share = bandwidth_ / static_cast<double>(remaining_.size());
    const double moved = share * (now - clock_);
    for (auto& [job, left] : remaining_) {
      left = std::max(0.0, left - moved);
    }
  }
  clock_ = now;
}

void SharedLink::add(std::int64_t job, double bytes, double now) {
  advance(now);
  if (!(bytes >= 0.0) || remaining_.count(job)) {
    throw InvariantViolation("bad transfer for job " + std::to_string(job));
  }
  remaining_[job] = bytes;
}

void SharedLink::remove(std::int64_t job) { remaining_.erase(job); }

std::optional<std::pair<double, std::int64_t>> SharedLink::next_finish() const {
  if (remaining_.empty()) {
    return std::nullopt;
  }
  auto best = remaining_.begin();
  for (auto it = remaining_.begin(); it != remaining_.end(); ++it) {
    if (it->second < best->second) {
      best = it;
    }
  }
  const double share = bandwidth_ / static_cast<double>(remaining_.size());
  return std::make_pair(clock_ + best->second / share, best->first);
}

std::vector<std::int64_t> SharedLink::take_finished(double slack) {
  std::vector<std::int64_t> out;
  for (auto it = remaining_.begin(); it != remaining_.end();) {
    if (it->second <= slack) {
      out.push_back(it->first);
      it = remaining_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

double SharedLink::remaining(std::int64_t job) const {
  auto it = remaining_.find(job);
  return it == remaining_.end() ? 0.0 : it->second;
}

// --- FuDG --------------------------------------------------------------------

void FudgTopology::validate(std::string_view path) const {
  const std::string p(path);
  if (prefill_instances < 1) {
    throw ValidationError(p + ".prefill_instances", "must be >= 1");
  }
  if (decode_instances < 1) {
    throw ValidationError(p + ".decode_instances", "must be >= 1");
  }
  if (!(link_bandwidth > 0.0)) {
    throw ValidationError(p + ".link_bandwidth", "must be > 0");
  }
  if (hops != 1 && hops != 2) {
    throw ValidationError(p + ".hops", "must be 1 or 2");
  }
  if (!(latency >= 0.0)) {
    throw ValidationError(p + ".latency", "must be >= 0");
  }
}

FudgStrategy::FudgStrategy(InstanceConfig cfg, FudgTopology topo,
                           bool record_routing)
    : cfg_(std::move(cfg)),
      topo_(topo),
      record_routing_(record_routing),
      kv_bytes_(0.0),
      link_(topo.link_bandwidth) {
  cfg_.validate();
  topo_.validate();
  kv_bytes_ = kv_bytes_per_token(cfg_.model);
}

void FudgStrategy::start(Simulator& sim) {
  for (int i = 0; i < topo_.prefill_instances; ++i) {
    prefill_ids_.push_back(sim.add_instance(cfg_, InstanceMode::kPrefillOnly));
  }
  for (int i = 0; i < topo_.decode_instances; ++i) {
    decode_ids_.push_back(sim.add_instance(cfg_, InstanceMode::kDecodeOnly));
  }
}

void FudgStrategy::on_arrival(Simulator& sim, RequestId id) {
  InstanceId best = prefill_ids_.front();
  std::int64_t best_load = std::numeric_limits<std::int64_t>::max();
  for (InstanceId i : prefill_ids_) {
    const InstanceState& inst = sim.instance(i);
    std::int64_t load = 0;
    for (RequestId r : inst.pending_prefills) {
      load += sim.remaining_prefill_tokens(r);
    }
    if (load < best_load) {
      best = i;
      best_load = load;
    }
  }
  if (record_routing_) {
    routing_log_.push_back({sim.now(), id, 0, best, {}});
  }
  sim.assign_prefill(best, id);
}

void FudgStrategy::on_prefill_complete(Simulator& sim, InstanceId /*id*/,
                                       RequestId req) {
  hop_[req] = 0;
  max_in_flight_ = std::max(max_in_flight_, hop_.size());
  sim.schedule(sim.now() + topo_.latency, EventKind::kTransferStage, req);
}

void FudgStrategy::begin_hop(Simulator& sim, RequestId req) {
  const double bytes =
      static_cast<double>(sim.record(req).input_len) * kv_bytes_;
  link_.add(req, bytes, sim.now());
  link_bytes_ += bytes;
  reschedule_link(sim);
}

void FudgStrategy::reschedule_link(Simulator& sim) {
  ++link_generation_;
  if (auto next = link_.next_finish()) {
    sim.schedule(std::max(next->first, sim.now()), EventKind::kKvTransferDone,
                 next->second, -1, link_generation_);
  }
}

void FudgStrategy::on_event(Simulator& sim, const Event& ev) {
  switch (ev.kind) {
    case EventKind::kTransferStage:
      begin_hop(sim, ev.a);
      return;
    case EventKind::kKvTransferDone: {
      if (ev.token != link_generation_) {
        return;  // shares changed since this was scheduled
      }
      link_.advance(sim.now());
      const std::vector<std::int64_t> finished =
          link_.take_finished(kLinkSlackSeconds * link_.bandwidth());
      for (RequestId req : finished) {
        int& h = hop_[req];
        ++h;
        if (h < topo_.hops) {
          sim.schedule(sim.now() + topo_.latency, EventKind::kTransferStage,
                       req);
        } else {
          deliver(sim, req);
        }
      }
      reschedule_link(sim);
      return;
    }
    default:
      return;
  }
}

void FudgStrategy::deliver(Simulator& sim, RequestId req) {
  hop_.erase(req);
  transferred_bytes_ +=
      static_cast<double>(sim.record(req).input_len) * kv_bytes_;
  InstanceId best = decode_ids_.front();
  std::int64_t best_load = std::numeric_limits<std::int64_t>::max();
  for (InstanceId i : decode_ids_) {
    const std::int64_t load = outstanding_tokens(sim, i);
    if (load < best_load) {
      best = i;
      best_load = load;
    }
  }
  sim.handoff(req, best);
}

}  // namespace padg
