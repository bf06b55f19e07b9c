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
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace padg {

using RequestId = std::int64_t;

struct Request {
  RequestId id = 0;
  double arrival_time = 0.0;
  std::int64_t input_len = 1;
  // Decode iterations the request needs. Only the engine reads this.
  std::int64_t output_len = 1;
  std::string app;
};

struct SloConfig {
  double ttft = 0.0;  // s
  double tpot = 0.0;  // s/token

  void validate(std::string_view path = "slo") const;
};

inline constexpr std::int64_t kMaxSequenceLen = 4096;

// Lognormal length distribution truncated (by rejection) to [lower, upper]
// and rounded to integers.
struct LengthDistribution {
  double mu = 0.0;
  double sigma = 1.0;
  std::int64_t lower = 1;
  std::int64_t upper = kMaxSequenceLen;

  // Closed-form fit ignoring truncation: mu = ln(median),
  // sigma = sqrt(2 ln(mean / median)). Requires mean > median.
  static LengthDistribution fit_untruncated(
      double mean, double median, std::int64_t lower = 1,
      std::int64_t upper = kMaxSequenceLen);

  // Fits (mu, sigma) so the truncated distribution has the requested mean
  // and median. Also handles mean <= median, which no untruncated lognormal
  // can express.
  static LengthDistribution fit(double mean, double median,
                                std::int64_t lower = 1,
                                std::int64_t upper = kMaxSequenceLen);

  double truncated_mean() const;
  double truncated_median() const;

  std::int64_t sample(std::mt19937_64& rng) const;

  void validate(std::string_view path) const;
};

struct DatasetPreset {
  std::string name;
  double input_mean;
  double input_median;
  double output_mean;
  double output_median;
  SloConfig slo;
};

// alpaca, sharegpt and longbench.
const std::vector<DatasetPreset>& dataset_presets();
const DatasetPreset& dataset_preset(std::string_view name,
                                    std::string_view path = "workload.preset");

// Piecewise-constant arrival rate: `rate` applies from `start` until the
// next step.
struct RateStep {
  double start = 0.0;
  double rate = 0.0;
};

struct WorkloadSpec {
  std::string name;
  double request_rate = 1.0;  // req/s, used when rate_steps is empty
  double duration = 60.0;     // s
  std::vector<RateStep> rate_steps;
  LengthDistribution input_len_dist;
  LengthDistribution output_len_dist;
  std::uint64_t seed = 0;

  void validate(std::string_view path = "workload") const;

  static WorkloadSpec from_preset(const DatasetPreset& preset, double rate,
                                  double duration, std::uint64_t seed);
};

// Poisson arrivals with truncated-lognormal lengths; a pure function of spec.
std::vector<Request> generate(const WorkloadSpec& spec);

// JSON Lines trace: {"arrival_time": s, "input_len": n, "output_len": n,
// "app": "..."} per line. Blank lines and '#' comments are skipped.
std::vector<Request> parse_trace(std::istream& in);
std::vector<Request> load_trace(const std::string& path);
void write_trace(std::ostream& out, const std::vector<Request>& requests);

}  // namespace padg
