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

#include "padgsim/workload.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "padgsim/errors.hpp"

namespace padg {
namespace {

struct Moments {
  double mean;
  double median;
};

Moments sample_moments(const LengthDistribution& d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> v(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& x : v) {
    x = d.sample(rng);
    sum += static_cast<double>(x);
  }
  std::sort(v.begin(), v.end());
  return {sum / n, static_cast<double>(v[v.size() / 2])};
}

TEST(LengthFitTest, UntruncatedParametersByHand) {
  const auto d = LengthDistribution::fit_untruncated(343.76, 148.0);
  EXPECT_NEAR(d.mu, std::log(148.0), 1e-12);
  EXPECT_NEAR(d.sigma, std::sqrt(2.0 * std::log(343.76 / 148.0)), 1e-12);
}

TEST(LengthFitTest, ShareGptInputsWithinTenPercent) {
  const auto d = LengthDistribution::fit(343.76, 148.0);
  const Moments m = sample_moments(d, 20000, 1);
  EXPECT_NEAR(m.mean, 343.76, 0.1 * 343.76);
  EXPECT_NEAR(m.median, 148.0, 0.1 * 148.0);
}

TEST(LengthFitTest, EveryPresetWithinTenPercent) {
  for (const DatasetPreset& p : dataset_presets()) {
    const WorkloadSpec spec = WorkloadSpec::from_preset(p, 1.0, 10.0, 0);
    const Moments in = sample_moments(spec.input_len_dist, 20000, 2);
    const Moments out = sample_moments(spec.output_len_dist, 20000, 3);
    EXPECT_NEAR(in.mean, p.input_mean, 0.1 * p.input_mean) << p.name;
    EXPECT_NEAR(in.median, p.input_median, 0.1 * p.input_median) << p.name;
    EXPECT_NEAR(out.mean, p.output_mean, 0.1 * p.output_mean) << p.name;
    EXPECT_NEAR(out.median, p.output_median, 0.1 * p.output_median) << p.name;
  }
}

TEST(LengthFitTest, SamplesStayInBounds) {
  const auto d = LengthDistribution::fit(101.78, 19.0);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50000; ++i) {
    const auto x = d.sample(rng);
    ASSERT_GE(x, 1);
    ASSERT_LE(x, kMaxSequenceLen);
  }
}

TEST(PresetTest, KnownPresets) {
  const DatasetPreset& s = dataset_preset("sharegpt");
  EXPECT_DOUBLE_EQ(s.slo.ttft, 5.0);
  EXPECT_DOUBLE_EQ(s.slo.tpot, 0.1);
  EXPECT_DOUBLE_EQ(dataset_preset("alpaca").slo.ttft, 1.0);
  EXPECT_DOUBLE_EQ(dataset_preset("longbench").slo.ttft, 15.0);
  EXPECT_THROW(dataset_preset("imagenet"), ValidationError);
}

TEST(GenerateTest, PoissonCountWithinThreeSigma) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("alpaca"), 2.0, 100.0, 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const auto reqs = generate(spec);
    EXPECT_NEAR(static_cast<double>(reqs.size()), 200.0, 3 * std::sqrt(200.0));
  }
}

TEST(GenerateTest, RateConvergesOverLongRun) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("alpaca"), 5.0, 4000.0, 9);
  const auto reqs = generate(spec);
  const double n = static_cast<double>(reqs.size());
  EXPECT_NEAR(n, 20000.0, 3 * std::sqrt(20000.0));
}

TEST(GenerateTest, DeterministicPerSeed) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("sharegpt"), 3.0, 50.0, 42);
  std::ostringstream a, b, c;
  write_trace(a, generate(spec));
  write_trace(b, generate(spec));
  spec.seed = 43;
  write_trace(c, generate(spec));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(GenerateTest, SortedIdsAndRampSteps) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("sharegpt"), 1.0, 400.0, 5);
  spec.rate_steps = {{0.0, 0.5}, {200.0, 4.0}};
  const auto reqs = generate(spec);
  std::size_t early = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(reqs[i].id, static_cast<RequestId>(i));
    if (i > 0) EXPECT_GE(reqs[i].arrival_time, reqs[i - 1].arrival_time);
    if (reqs[i].arrival_time < 200.0) ++early;
  }
  EXPECT_NEAR(static_cast<double>(early), 100.0, 3 * std::sqrt(100.0));
  EXPECT_NEAR(static_cast<double>(reqs.size() - early), 800.0,
              3 * std::sqrt(800.0));
}

TEST(GenerateTest, InvalidSpecRejected) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("sharegpt"), 0.0, 10.0, 0);
  EXPECT_THROW(generate(spec), ValidationError);
  spec.request_rate = 1.0;
  spec.duration = -1.0;
  EXPECT_THROW(generate(spec), ValidationError);
}

TEST(TraceTest, ParsesInOrder) {
  std::istringstream in(
      "{\"arrival_time\": 0.0, \"input_len\": 10, \"output_len\": 3}\n"
      "# comment\n"
      "{\"arrival_time\": 0.5, \"input_len\": 20, \"output_len\": 1, "
      "\"app\": \"chat\"}\n"
      "{\"arrival_time\": 0.5, \"input_len\": 7, \"output_len\": 9}\n");
  const auto reqs = parse_trace(in);
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[1].input_len, 20);
  EXPECT_EQ(reqs[1].app, "chat");
  EXPECT_EQ(reqs[2].id, 2);
}

TEST(TraceTest, ZeroLengthRejectedWithLine) {
  std::istringstream in(
      "{\"arrival_time\": 0.0, \"input_len\": 10, \"output_len\": 3}\n"
      "{\"arrival_time\": 1.0, \"input_len\": 0, \"output_len\": 3}\n");
  try {
    parse_trace(in);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "input_len");
  }
}

TEST(TraceTest, NonMonotoneArrivalsRejected) {
  std::istringstream in(
      "{\"arrival_time\": 1.0, \"input_len\": 10, \"output_len\": 3}\n"
      "{\"arrival_time\": 0.5, \"input_len\": 4, \"output_len\": 3}\n");
  EXPECT_THROW(parse_trace(in), SchemaError);
}

TEST(TraceTest, MalformedAndUnknownFields) {
  std::istringstream bad("{\"arrival_time\": 1.0,\n");
  EXPECT_THROW(parse_trace(bad), ParseError);
  std::istringstream extra(
      "{\"arrival_time\": 1.0, \"input_len\": 1, \"output_len\": 1, "
      "\"prompt\": \"hi\"}\n");
  EXPECT_THROW(parse_trace(extra), SchemaError);
}

TEST(TraceTest, RoundTrip) {
  WorkloadSpec spec =
      WorkloadSpec::from_preset(dataset_preset("alpaca"), 3.0, 20.0, 8);
  const auto reqs = generate(spec);
  std::stringstream buf;
  write_trace(buf, reqs);
  const auto back = parse_trace(buf);
  ASSERT_EQ(back.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(back[i].arrival_time, reqs[i].arrival_time);
    EXPECT_EQ(back[i].input_len, reqs[i].input_len);
    EXPECT_EQ(back[i].output_len, reqs[i].output_len);
  }
}

}  // namespace
}  // namespace padg
