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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "padgsim/errors.hpp"
#include "test_util.hpp"

namespace padg {
namespace {

using testing::req;

// Drives a link through arrivals and returns completion time per job.
std::map<std::int64_t, double> drive_link(
    double bw, const std::vector<std::pair<double, double>>& jobs) {
  SharedLink link(bw);
  std::map<std::int64_t, double> done;
  std::size_t next = 0;
  double now = 0.0;
  while (next < jobs.size() || link.active() > 0) {
    const auto fin = link.next_finish();
    if (next < jobs.size() && (!fin || jobs[next].first <= fin->first)) {
      now = jobs[next].first;
      link.add(static_cast<std::int64_t>(next), jobs[next].second, now);
      ++next;
      continue;
    }
    now = fin->first;
    link.advance(now);
    for (auto j : link.take_finished(1e-6)) done[j] = now;
  }
  return done;
}

// Oracle: time-stepped equal sharing.
std::map<std::int64_t, double> stepped_link(
    double bw, const std::vector<std::pair<double, double>>& jobs, double dt) {
  std::map<std::int64_t, double> left, done;
  double t = 0.0;
  std::size_t next = 0;
  while (next < jobs.size() || !left.empty()) {
    while (next < jobs.size() && jobs[next].first <= t) {
      left[static_cast<std::int64_t>(next)] = jobs[next].second;
      ++next;
    }
    if (!left.empty()) {
      const double step = bw * dt / static_cast<double>(left.size());
      for (auto it = left.begin(); it != left.end();) {
        it->second -= step;
        if (it->second <= 0.0) {
          done[it->first] = t + dt;
          it = left.erase(it);
        } else {
          ++it;
        }
      }
    }
    t += dt;
  }
  return done;
}

TEST(SharedLinkTest, TwoJobsByHand) {
  // 10 B/s shared: B (50 B) ends at 10 s; A (100 B) has 50 B left, ends at 15.
  const auto done = drive_link(10.0, {{0.0, 100.0}, {0.0, 50.0}});
  EXPECT_NEAR(done.at(1), 10.0, 1e-9);
  EXPECT_NEAR(done.at(0), 15.0, 1e-9);
}

TEST(SharedLinkTest, MatchesSteppedOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int iter = 0; iter < 20; ++iter) {
    std::vector<std::pair<double, double>> jobs;
    double t = 0.0;
    for (int i = 0; i < 6; ++i) {
      t += 2.0 * u(rng);
      jobs.emplace_back(t, 1.0 + 20.0 * u(rng));
    }
    const auto got = drive_link(10.0, jobs);
    const auto want = stepped_link(10.0, jobs, 1e-4);
    ASSERT_EQ(got.size(), jobs.size());
    for (const auto& [j, time] : want) {
      EXPECT_NEAR(got.at(j), time, 1e-3) << iter << " job " << j;
    }
  }
}

TEST(SharedLinkTest, RejectsBadInput) {
  EXPECT_THROW(SharedLink(0.0), ValidationError);
  SharedLink link(1.0);
  link.advance(5.0);
  EXPECT_THROW(link.advance(4.0), InvariantViolation);
}

SimulationResult run(Strategy& s, std::vector<Request> reqs) {
  EngineOptions opts;
  opts.check_invariants = true;
  Simulator sim(std::move(reqs), opts, s);
  return sim.run();
}

TEST(FudgTest, LoneTransferTimeByHand) {
  const InstanceConfig cfg = testing::llama_l20();
  // Llama-30B: 2 * 60 layers * 6656 * 2 B = 1,597,440 B per token.
  ASSERT_DOUBLE_EQ(kv_bytes_per_token(cfg.model), 1597440.0);
  for (int hops : {1, 2}) {
    FudgTopology topo;
    topo.link_bandwidth = 1.25e9;
    topo.hops = hops;
    topo.latency = 0.01;
    FudgStrategy fudg(cfg, topo);
    const auto res = run(fudg, {req(0, 0.0, 1000, 4)});
    const RequestRecord& r = res.records[0];
    const double expect = hops * (0.01 + 1000 * 1597440.0 / 1.25e9);
    EXPECT_NEAR(r.decode_begin_time - r.prefill_end_time, expect, 1e-9);
    EXPECT_NEAR(expect / hops, 1.2879, 1e-3);
    EXPECT_NE(r.decode_instance, r.routed_instance);
    EXPECT_DOUBLE_EQ(fudg.transferred_bytes(), 1000 * 1597440.0);
    EXPECT_DOUBLE_EQ(fudg.link_bytes(), hops * 1000 * 1597440.0);
  }
}

TEST(FudgTest, BytesConservedUnderLoad) {
  const InstanceConfig cfg = testing::llama_l20();
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("sharegpt"), 2.0, 60.0, 12);
  const auto reqs = generate(spec);
  FudgTopology topo;
  topo.prefill_instances = 2;
  topo.decode_instances = 2;
  topo.hops = 2;
  FudgStrategy fudg(cfg, topo);
  const auto res = run(fudg, reqs);
  ASSERT_TRUE(res.quiescent);
  double prompt_tokens = 0.0;
  for (const auto& r : reqs) prompt_tokens += static_cast<double>(r.input_len);
  const double per_token = kv_bytes_per_token(cfg.model);
  EXPECT_NEAR(fudg.transferred_bytes(), prompt_tokens * per_token, 1.0);
  EXPECT_NEAR(fudg.link_bytes(), 2 * prompt_tokens * per_token, 1.0);
  EXPECT_EQ(fudg.transfers_in_flight(), 0u);
  for (const auto& r : res.records) {
    EXPECT_LT(r.routed_instance, 2);
    EXPECT_GE(r.decode_instance, 2);
    // Even alone on the link a transfer takes this long.
    EXPECT_GE(r.decode_begin_time - r.prefill_end_time,
              2 * r.input_len * per_token / topo.link_bandwidth - 1e-9);
  }
}

TEST(FudgTest, ValidatesTopology) {
  FudgTopology topo;
  topo.hops = 3;
  EXPECT_THROW(topo.validate(), ValidationError);
  topo.hops = 1;
  topo.prefill_instances = 0;
  EXPECT_THROW(topo.validate(), ValidationError);
}

TEST(NodgTest, RoutesToLeastOutstandingTokens) {
  const InstanceConfig cfg = testing::llama_l20();
  NodgStrategy nodg(cfg, 3, InstanceMode::kSeparate);
  // Three simultaneous prompts land on three instances; the fourth goes to
  // the instance holding the shortest prompt.
  const auto res = run(nodg, {req(0, 0.0, 900, 2), req(1, 0.0, 300, 2),
                              req(2, 0.0, 600, 2), req(3, 0.0, 10, 2)});
  EXPECT_EQ(res.records[0].routed_instance, 0);
  EXPECT_EQ(res.records[1].routed_instance, 1);
  EXPECT_EQ(res.records[2].routed_instance, 2);
  EXPECT_EQ(res.records[3].routed_instance, 1);
  EXPECT_EQ(nodg.name(), "nodg-separate");
}

TEST(NodgTest, HybridAndSeparateBothFinish) {
  const InstanceConfig cfg = testing::llama_l20();
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("sharegpt"), 2.0, 60.0, 2);
  const auto reqs = generate(spec);
  for (InstanceMode mode : {InstanceMode::kSeparate, InstanceMode::kHybrid}) {
    NodgStrategy nodg(cfg, 2, mode);
    const auto res = run(nodg, reqs);
    EXPECT_TRUE(res.quiescent);
    EXPECT_EQ(nodg.routing_log().size(), reqs.size());
  }
  NodgStrategy hybrid(cfg, 2, InstanceMode::kHybrid);
  EXPECT_EQ(hybrid.name(), "nodg-hybrid");
}

}  // namespace
}  // namespace padg
