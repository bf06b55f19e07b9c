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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "padgsim/engine.hpp"
#include "padgsim/routing_log.hpp"

namespace padg {

// Outstanding tokens of an instance: prompt tokens still to prefill plus the
// KV held by its residents.
std::int64_t outstanding_tokens(const Simulator& sim, InstanceId id);

// Independent instances that each run prefills and decodes.
class NodgStrategy : public Strategy {
 public:
  // `mode` is kSeparate (prefill priority) or kHybrid (chunked prefill,
  // decode priority).
  NodgStrategy(InstanceConfig cfg, int instances, InstanceMode mode,
               bool record_routing = true);

  std::string name() const override;
  void start(Simulator& sim) override;
  void on_arrival(Simulator& sim, RequestId id) override;

  const std::vector<RoutingLogEntry>& routing_log() const {
    return routing_log_;
  }

 private:
  InstanceConfig cfg_;
  int count_;
  InstanceMode mode_;
  bool record_routing_;
  std::vector<InstanceId> ids_;
  std::vector<RoutingLogEntry> routing_log_;
};

// Processor-sharing link: active transfers split the bandwidth equally.
class SharedLink {
 public:
  explicit SharedLink(double bandwidth);

  // Moves every active transfer forward to `now`.
  void advance(double now);
  // Starts a transfer at `now` (advances first).
  void add(std::int64_t job, double bytes, double now);
  void remove(std::int64_t job);
  // Removes and returns transfers with at most `slack` bytes left.
  std::vector<std::int64_t> take_finished(double slack);
  // Earliest finishing transfer under the current shares: (time, job).
  std::optional<std::pair<double, std::int64_t>> next_finish() const;
  double remaining(std::int64_t job) const;
  std::size_t active() const { return remaining_.size(); }
  double bandwidth() const { return bandwidth_; }

 private:
  double bandwidth_;
  double clock_ = 0.0;
  std::map<std::int64_t, double> remaining_;
};

struct FudgTopology {
  int prefill_instances = 1;
  int decode_instances = 1;
  double link_bandwidth = 1.25e9;  // bytes/s
  int hops = 1;                    // 2 = through a cache pool
  double latency = 0.0;            // s per hop

  void validate(std::string_view path = "strategy.params") const;
};

// Dedicated prefill and decode instances; KV crosses a shared link.
class FudgStrategy : public Strategy {
 public:
  FudgStrategy(InstanceConfig cfg, FudgTopology topo,
               bool record_routing = true);

  std::string name() const override { return "fudg"; }
  void start(Simulator& sim) override;
  void on_arrival(Simulator& sim, RequestId id) override;
  void on_event(Simulator& sim, const Event& ev) override;
  void on_prefill_complete(Simulator& sim, InstanceId id,
                           RequestId req) override;

  const std::vector<RoutingLogEntry>& routing_log() const {
    return routing_log_;
  }
  // KV payload delivered to decode instances, counted once per request.
  double transferred_bytes() const { return transferred_bytes_; }
  // Bytes pushed through the link, hops included.
  double link_bytes() const { return link_bytes_; }
  std::size_t transfers_in_flight() const { return hop_.size(); }
  std::size_t max_transfers_in_flight() const { return max_in_flight_; }

 private:
  void begin_hop(Simulator& sim, RequestId req);
  void reschedule_link(Simulator& sim);
  void deliver(Simulator& sim, RequestId req);

  InstanceConfig cfg_;
  FudgTopology topo_;
  bool record_routing_;
  double kv_bytes_;
  std::vector<InstanceId> prefill_ids_;
  std::vector<InstanceId> decode_ids_;
  SharedLink link_;
  std::map<RequestId, int> hop_;  // hops completed
  std::uint64_t link_generation_ = 0;
  double transferred_bytes_ = 0.0;
  double link_bytes_ = 0.0;
  std::size_t max_in_flight_ = 0;
  std::vector<RoutingLogEntry> routing_log_;
};

}  // namespace padg
