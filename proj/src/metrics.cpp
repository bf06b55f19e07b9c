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

#include "padgsim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "padgsim/errors.hpp"

namespace padg {

RequestMetrics request_metrics(const RequestRecord& rec, const SloConfig& slo) {
  RequestMetrics m;
  m.id = rec.id;
  m.finished = rec.finished();
  if (!std::isnan(rec.decode_begin_time)) {
    m.reported_ttft = rec.decode_begin_time - rec.arrival_time;
    m.switch_wait = rec.decode_begin_time - rec.prefill_end_time;
  }
  if (m.finished && rec.tokens_generated >= 1) {
    m.tpot = (rec.completion_time - rec.decode_begin_time) /
             static_cast<double>(rec.tokens_generated);
  }
  if (m.finished) {
    m.ttft_ok = m.reported_ttft <= slo.ttft;
    // Same test as elapsed <= tokens * slo, written so that it does not
    // depend on the rounding of the division above.
    m.tpot_ok = rec.completion_time - rec.decode_begin_time <=
                static_cast<double>(rec.tokens_generated) * slo.tpot;
  }
  return m;
}

int classify_at(const RequestRecord& rec, const SloConfig& slo, double now) {
  if (rec.finished() && rec.completion_time <= now) {
    return request_metrics(rec, slo).ok() ? 1 : 0;
  }
  if (!std::isnan(rec.decode_begin_time) && rec.decode_begin_time <= now) {
    return rec.decode_begin_time - rec.arrival_time > slo.ttft ? 0 : -1;
  }
  return now - rec.arrival_time > slo.ttft ? 0 : -1;
}

Attainment attainment(std::span<const RequestRecord> records,
                      const SloConfig& slo) {
  if (records.empty()) {
    throw EmptyInput("attainment over no requests");
  }
  Attainment a;
  for (const RequestRecord& rec : records) {
    ++a.total;
    if (!rec.finished()) {
      ++a.unfinished;
      continue;
    }
    if (request_metrics(rec, slo).ok()) {
      ++a.ok;
    }
  }
  a.fraction = static_cast<double>(a.ok) / static_cast<double>(a.total);
  return a;
}

std::vector<TimelineBucket> attainment_timeline(
    std::span<const RequestRecord> records, const SloConfig& slo, double bucket,
    double end) {
  if (!(bucket > 0.0)) {
    throw ValidationError("timeline.bucket", "must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::ceil(end / bucket));
  std::vector<TimelineBucket> out(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].start = static_cast<double>(i) * bucket;
  }
  for (const RequestRecord& rec : records) {
    auto i = static_cast<std::size_t>(rec.arrival_time / bucket);
    if (i >= out.size()) {
      continue;
    }
    ++out[i].total;
    if (request_metrics(rec, slo).ok()) {
      ++out[i].ok;
    }
  }
  for (TimelineBucket& b : out) {
    if (b.total > 0) {
      b.attainment = static_cast<double>(b.ok) / static_cast<double>(b.total);
    }
  }
  return out;
}

namespace {

void validate_percentile(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ValidationError("percentile", "must be in (0, 1]");
  }
}

GoodputProbe run_probe(double rate, double p, const RateProbe& probe) {
  GoodputProbe g;
  g.rate = rate;
  g.result = probe(rate);
  g.pass = g.result.attainment >= p;
  return g;
}

}  // namespace

GoodputResult goodput_grid(const std::vector<double>& rates, double percentile,
                           const RateProbe& probe, bool scan_all) {
  validate_percentile(percentile);
  if (rates.empty()) {
    throw ValidationError("sweep.rates", "must not be empty");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0) || (i > 0 && rates[i] <= rates[i - 1])) {
      throw ValidationError("sweep.rates", "must be positive and ascending");
    }
  }
  GoodputResult out;
  bool failed = false;
  for (double rate : rates) {
    GoodputProbe g = run_probe(rate, percentile, probe);
    out.probes.push_back(g);
    if (!g.pass) {
      failed = true;
      if (!scan_all) {
        break;
      }
      continue;
    }
    if (failed) {
      out.non_monotone = true;
      continue;
    }
    out.rate = rate;
    out.tokens_per_s = rate * g.result.mean_output_tokens;
  }
  if (!out.probes.front().pass) {
    throw NoFeasibleRate("attainment " +
                         format_double(out.probes.front().result.attainment) +
                         " below " + format_double(percentile) +
                         " already at rate " + format_double(rates.front()));
  }
  return out;
}

GoodputResult goodput_bisect(double lo, double hi, double tolerance,
                             double percentile, const RateProbe& probe) {
  validate_percentile(percentile);
  if (!(lo > 0.0) || !(hi > lo)) {
    throw ValidationError("sweep.bounds", "need 0 < lo < hi");
  }
  if (!(tolerance > 0.0)) {
    throw ValidationError("sweep.tolerance", "must be > 0");
  }
  GoodputResult out;
  GoodputProbe low = run_probe(lo, percentile, probe);
  out.probes.push_back(low);
  if (!low.pass) {
    throw NoFeasibleRate("attainment " + format_double(low.result.attainment) +
                         " below " + format_double(percentile) +
                         " already at rate " + format_double(lo));
  }
  GoodputProbe best = low;
  GoodputProbe high = run_probe(hi, percentile, probe);
  out.probes.push_back(high);
  if (high.pass) {
    best = high;
  } else {
    double a = lo;
    double b = hi;
    while (b - a > tolerance) {
      const double mid = 0.5 * (a + b);
      GoodputProbe g = run_probe(mid, percentile, probe);
      out.probes.push_back(g);
      if (g.pass) {
        a = mid;
        best = g;
      } else {
        b = mid;
      }
    }
  }
  out.rate = best.rate;
  out.tokens_per_s = best.rate * best.result.mean_output_tokens;
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_requests_csv(std::ostream& out,
                        std::span<const RequestRecord> records,
                        const SloConfig& slo) {
  out << "request_id,arrival,input_len,output_len,instance,reported_ttft,"
         "switch_wait,tpot,ttft_ok,tpot_ok\n";
  for (const RequestRecord& rec : records) {
    const RequestMetrics m = request_metrics(rec, slo);
    out << rec.id << ',' << format_double(rec.arrival_time) << ','
        << rec.input_len << ',' << rec.true_output_len << ','
        << rec.routed_instance << ',' << format_double(m.reported_ttft) << ','
        << format_double(m.switch_wait) << ',' << format_double(m.tpot) << ','
        << (m.ttft_ok ? 1 : 0) << ',' << (m.tpot_ok ? 1 : 0) << '\n';
  }
}

void write_timeline_csv(std::ostream& out,
                        const std::vector<TimelineBucket>& timeline) {
  out << "bucket_start,requests,ok,attainment\n";
  for (const TimelineBucket& b : timeline) {
    out << format_double(b.start) << ',' << b.total << ',' << b.ok << ','
        << format_double(b.attainment) << '\n';
  }
}

}  // namespace padg
