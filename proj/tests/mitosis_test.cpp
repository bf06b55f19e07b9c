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

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "padgsim/errors.hpp"

namespace padg {
namespace {

ScalingPolicy policy() {
  ScalingPolicy p;
  p.n_lower = 3;
  p.n_upper = 6;
  return p;
}

std::vector<int> step(const std::vector<int>& sizes, ScaleDirection dir) {
  return apply_action(sizes, scale_step(sizes, dir, policy()), policy());
}

TEST(MitosisTest, SplitThenShrinkThenMerge) {
  const ScalingPolicy p = policy();
  const ScalingAction split = scale_step({6}, ScaleDirection::kExpand, p);
  EXPECT_EQ(split.kind, ScalingKind::kSplit);
  EXPECT_EQ(split.macro, 0);
  EXPECT_EQ(step({6}, ScaleDirection::kExpand), (std::vector<int>{4, 3}));

  const ScalingAction shrink = scale_step({4, 3}, ScaleDirection::kContract, p);
  EXPECT_EQ(shrink.kind, ScalingKind::kRemoveInstance);
  EXPECT_EQ(shrink.macro, 0);
  EXPECT_EQ(step({4, 3}, ScaleDirection::kContract), (std::vector<int>{3, 3}));

  const ScalingAction merge = scale_step({3, 3}, ScaleDirection::kContract, p);
  EXPECT_EQ(merge.kind, ScalingKind::kMerge);
  EXPECT_EQ(step({3, 3}, ScaleDirection::kContract), (std::vector<int>{5}));
}

TEST(MitosisTest, ExpandFillsLargestOpenMacro) {
  EXPECT_EQ(step({4, 5, 6}, ScaleDirection::kExpand),
            (std::vector<int>{4, 6, 6}));
  EXPECT_EQ(step({3}, ScaleDirection::kExpand), (std::vector<int>{4}));
}

TEST(MitosisTest, ContractStopsAtFloor) {
  ScalingPolicy p = policy();
  p.min_instances = 3;
  EXPECT_EQ(scale_step({3}, ScaleDirection::kContract, p).kind,
            ScalingKind::kNone);
  EXPECT_EQ(scale_step({4}, ScaleDirection::kNone, p).kind, ScalingKind::kNone);
}

TEST(MitosisTest, RandomWalksKeepBounds) {
  const ScalingPolicy p = policy();
  std::mt19937_64 rng(17);
  std::bernoulli_distribution up(0.55);
  for (int walk = 0; walk < 200; ++walk) {
    std::vector<int> sizes{3 + walk % 4};
    for (int i = 0; i < 60; ++i) {
      const ScaleDirection dir =
          up(rng) ? ScaleDirection::kExpand : ScaleDirection::kContract;
      const int before = std::accumulate(sizes.begin(), sizes.end(), 0);
      const ScalingAction a = scale_step(sizes, dir, p);
      sizes = apply_action(sizes, a, p);
      const int after = std::accumulate(sizes.begin(), sizes.end(), 0);
      if (a.kind == ScalingKind::kNone) {
        ASSERT_EQ(after, before);
      } else {
        ASSERT_EQ(after - before, dir == ScaleDirection::kExpand ? 1 : -1);
      }
      for (int s : sizes) {
        ASSERT_GE(s, p.n_lower);
        ASSERT_LE(s, p.n_upper);
      }
      ASSERT_GE(after, p.min_instances);
    }
  }
}

TEST(MitosisTest, PolicyValidation) {
  ScalingPolicy p = policy();
  p.n_lower = 4;
  p.n_upper = 6;  // a split of 7 cannot leave two macros of 4
  EXPECT_THROW(p.validate(), ValidationError);
  p = policy();
  p.attainment_target = 1.5;
  EXPECT_THROW(p.validate(), ValidationError);
  EXPECT_NO_THROW(policy().validate());
}

InstanceHandler handler() {
  InstanceHandler h;
  h.actor_id = 0x0102030405060708ULL;
  h.worker_address = "10.0.0.7:5000";
  h.model = "llama-30b";
  h.device = "l20";
  h.tp_degree = 2;
  return h;
}

TEST(HandlerCodecTest, RoundTrip) {
  const InstanceHandler h = handler();
  EXPECT_EQ(deserialize(serialize(h)), h);
  EXPECT_EQ(deserialize(serialize(InstanceHandler{})), InstanceHandler{});
}

TEST(HandlerCodecTest, ByteLayout) {
  const std::string b = serialize(handler());
  ASSERT_GE(b.size(), 13u);
  EXPECT_EQ(static_cast<std::uint8_t>(b[0]), kHandlerVersion);
  // Length prefix 8, then actor_id little-endian.
  EXPECT_EQ(b.substr(1, 4), std::string("\x08\0\0\0", 4));
  EXPECT_EQ(static_cast<std::uint8_t>(b[5]), 0x08);
  EXPECT_EQ(static_cast<std::uint8_t>(b[12]), 0x01);
  // 1 + 5 fields * 4 + 8 + 13 + 9 + 3 + 4
  EXPECT_EQ(b.size(), 1u + 20u + 8u + 13u + 9u + 3u + 4u);
}

TEST(HandlerCodecTest, RejectsBadInput) {
  std::string b = serialize(handler());
  std::string wrong = b;
  wrong[0] = 2;
  EXPECT_THROW(deserialize(wrong), VersionMismatch);
  EXPECT_THROW(deserialize(b.substr(0, b.size() - 1)), ParseError);
  EXPECT_THROW(deserialize(b + "x"), ParseError);
  EXPECT_THROW(deserialize(""), ParseError);
  std::string huge = b.substr(0, 1) + std::string("\xff\xff\xff\x7f", 4);
  EXPECT_THROW(deserialize(huge), ParseError);
}

}  // namespace
}  // namespace padg
