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

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "padgsim/engine.hpp"
#include "padgsim/workload.hpp"

namespace padg {

// Reported TTFT runs from arrival to the first decode iteration, so it holds
// both the time to the first token and the wait for the instance to switch
// back to decoding. TPOT starts after that wait.
struct RequestMetrics {
  RequestId id = 0;
  bool finished = false;
  double reported_ttft = kNever;
  double switch_wait = kNever;  // decode_begin - prefill_end
  double tpot = kNever;
  bool ttft_ok = false;
  bool tpot_ok = false;

  bool ok() const { return ttft_ok && tpot_ok; }
};

// Unfinished requests are violations.
RequestMetrics request_metrics(const RequestRecord& rec, const SloConfig& slo);

// Classification of a request that may still be running at `now`: 1 = met
// both SLOs, 0 = violated one already, -1 = not known yet.
int classify_at(const RequestRecord& rec, const SloConfig& slo, double now);

struct Attainment {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t unfinished = 0;
  double fraction = 0.0;

  bool meets(double percentile) const { return fraction >= percentile; }
};

// Joint (TTFT and TPOT) attainment. Throws EmptyInput on no records.
Attainment attainment(std::span<const RequestRecord> records,
                      const SloConfig& slo);

struct TimelineBucket {
  double start = 0.0;
  std::size_t total = 0;
  std::size_t ok = 0;
  double attainment = kNever;  // NaN for an empty bucket
};

// Buckets requests by arrival time.
std::vector<TimelineBucket> attainment_timeline(
    std::span<const RequestRecord> records, const SloConfig& slo, double bucket,
    double end);

struct ProbeResult {
  double attainment = 0.0;
  std::size_t unfinished = 0;
  double mean_output_tokens = 0.0;
};

using RateProbe = std::function<ProbeResult(double rate)>;

struct GoodputProbe {
  double rate = 0.0;
  ProbeResult result;
  bool pass = false;
};

struct GoodputResult {
  double rate = 0.0;          // req/s
  double tokens_per_s = 0.0;  // output tokens/s at that rate
  std::vector<GoodputProbe> probes;
  // Set when a probe above a failing rate passed again.
  bool non_monotone = false;
};

// Probes ascending `rates` and stops at the first failure (or probes all of
// them when `scan_all`). Throws NoFeasibleRate if the first rate fails.
GoodputResult goodput_grid(const std::vector<double>& rates, double percentile,
                           const RateProbe& probe, bool scan_all = false);

// Bisects [lo, hi] down to `tolerance` req/s. Throws NoFeasibleRate if `lo`
// fails; returns hi if hi passes.
GoodputResult goodput_bisect(double lo, double hi, double tolerance,
                             double percentile, const RateProbe& probe);

// request_id,arrival,input_len,output_len,instance,reported_ttft,switch_wait,
// tpot,ttft_ok,tpot_ok
void write_requests_csv(std::ostream& out,
                        std::span<const RequestRecord> records,
                        const SloConfig& slo);

void write_timeline_csv(std::ostream& out,
                        const std::vector<TimelineBucket>& timeline);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace padg
