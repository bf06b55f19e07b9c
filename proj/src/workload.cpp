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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "padgsim/errors.hpp"

namespace padg {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Continuous support before rounding to the integer range [lower, upper].
double support_lo(const LengthDistribution& d) {
  return static_cast<double>(d.lower) - 0.5;
}
double support_hi(const LengthDistribution& d) {
  return static_cast<double>(d.upper) + 0.5;
}

// mu that puts the truncated median at `median` for a fixed sigma.
double mu_for_median(LengthDistribution d, double median) {
  double lo = -50.0;
  double hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    d.mu = 0.5 * (lo + hi);
    if (d.truncated_median() < median) {
      lo = d.mu;
    } else {
      hi = d.mu;
    }
  }
  return 0.5 * (lo + hi);
}

const std::vector<DatasetPreset> kPresets = {
    {"alpaca", 20.63, 17.00, 163.80, 119.00, {1.0, 0.1}},
    {"sharegpt", 343.76, 148.00, 237.20, 152.00, {5.0, 0.1}},
    {"longbench", 2686.89, 2736.50, 101.78, 19.00, {15.0, 0.1}},
};

}  // namespace

void SloConfig::validate(std::string_view path) const {
  const std::string p(path);
  if (!(ttft > 0.0) || !std::isfinite(ttft)) {
    throw ValidationError(p + ".ttft", "must be > 0");
  }
  if (!(tpot > 0.0) || !std::isfinite(tpot)) {
    throw ValidationError(p + ".tpot", "must be > 0");
  }
}

LengthDistribution LengthDistribution::fit_untruncated(double mean,
                                                       double median,
                                                       std::int64_t lower,
                                                       std::int64_t upper) {
  if (!(median > 0.0) || !(mean > median)) {
    throw ValidationError("length_dist",
                          "closed-form fit needs mean > median > 0");
  }
  LengthDistribution d;
  d.mu = std::log(median);
  d.sigma = std::sqrt(2.0 * std::log(mean / median));
  d.lower = lower;
  d.upper = upper;
  return d;
}

LengthDistribution LengthDistribution::fit(double mean, double median,
                                           std::int64_t lower,
                                           std::int64_t upper) {
  if (!(median > 0.0) || !(mean > 0.0)) {
    throw ValidationError("length_dist", "mean and median must be > 0");
  }
  LengthDistribution d;
  d.lower = lower;
  d.upper = upper;
  auto mean_error = [&](double sigma) {
    LengthDistribution t = d;
    t.sigma = sigma;
    t.mu = mu_for_median(t, median);
    return t.truncated_mean() - mean;
  };

  constexpr double kStep = 0.01;
  double best_sigma = kStep;
  double best_err = std::numeric_limits<double>::infinity();
  double prev_sigma = kStep;
  double prev_err = mean_error(prev_sigma);
  for (double sigma = 2 * kStep; sigma <= 5.0; sigma += kStep) {
    const double err = mean_error(sigma);
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best_sigma = sigma;
    }
    if ((prev_err <= 0.0) != (err <= 0.0)) {
      double lo = prev_sigma;
      double hi = sigma;
      const bool rising = prev_err <= 0.0;
      for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((mean_error(mid) <= 0.0) == rising) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      best_sigma = 0.5 * (lo + hi);
      break;
    }
    prev_sigma = sigma;
    prev_err = err;
  }
  d.sigma = best_sigma;
  d.mu = mu_for_median(d, median);
  return d;
}

double LengthDistribution::truncated_mean() const {
  const double a = (std::log(support_lo(*this)) - mu) / sigma;
  const double b = (std::log(support_hi(*this)) - mu) / sigma;
  const double mass = normal_cdf(b) - normal_cdf(a);
  return std::exp(mu + 0.5 * sigma * sigma) *
         (normal_cdf(b - sigma) - normal_cdf(a - sigma)) / mass;
}

double LengthDistribution::truncated_median() const {
  const double a = (std::log(support_lo(*this)) - mu) / sigma;
  const double b = (std::log(support_hi(*this)) - mu) / sigma;
  const double p = 0.5 * (normal_cdf(a) + normal_cdf(b));
  return std::exp(mu + sigma * normal_quantile(p));
}

std::int64_t LengthDistribution::sample(std::mt19937_64& rng) const {
  std::lognormal_distribution<double> dist(mu, sigma);
  const double lo = support_lo(*this);
  const double hi = support_hi(*this);
  for (;;) {
    const double x = dist(rng);
    if (x >= lo && x < hi) {
      return std::clamp<std::int64_t>(std::llround(x), lower, upper);
    }
  }
}

void LengthDistribution::validate(std::string_view path) const {
  const std::string p(path);
  if (!std::isfinite(mu)) {
    throw ValidationError(p + ".mu", "must be finite");
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw ValidationError(p + ".sigma", "must be finite and > 0");
  }
  if (lower < 1 || upper < lower || upper > kMaxSequenceLen) {
    throw ValidationError(p, "bounds must satisfy 1 <= lower <= upper <= 4096");
  }
}

const std::vector<DatasetPreset>& dataset_presets() { return kPresets; }

const DatasetPreset& dataset_preset(std::string_view name,
                                    std::string_view path) {
  for (const DatasetPreset& p : kPresets) {
    if (p.name == name) {
      return p;
    }
  }
  throw ValidationError(std::string(path),
                        "unknown dataset preset '" + std::string(name) + "'");
}

void WorkloadSpec::validate(std::string_view path) const {
  const std::string p(path);
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError(p + ".duration", "must be > 0");
  }
  if (rate_steps.empty()) {
    if (!(request_rate > 0.0) || !std::isfinite(request_rate)) {
      throw ValidationError(p + ".rate", "must be > 0");
    }
  } else {
    double last = -1.0;
    for (std::size_t i = 0; i < rate_steps.size(); ++i) {
      const std::string sp = p + ".ramp[" + std::to_string(i) + "]";
      if (rate_steps[i].start <= last || rate_steps[i].start < 0.0) {
        throw ValidationError(sp + ".at", "must be increasing and >= 0");
      }
      if (!(rate_steps[i].rate > 0.0) || !std::isfinite(rate_steps[i].rate)) {
        throw ValidationError(sp + ".rate", "must be > 0");
      }
      last = rate_steps[i].start;
    }
  }
  input_len_dist.validate(p + ".input_len_dist");
  output_len_dist.validate(p + ".output_len_dist");
}

WorkloadSpec WorkloadSpec::from_preset(const DatasetPreset& preset, double rate,
                                       double duration, std::uint64_t seed) {
  WorkloadSpec spec;
  spec.name = preset.name;
  spec.request_rate = rate;
  spec.duration = duration;
  spec.input_len_dist =
      LengthDistribution::fit(preset.input_mean, preset.input_median);
  spec.output_len_dist =
      LengthDistribution::fit(preset.output_mean, preset.output_median);
  spec.seed = seed;
  return spec;
}

std::vector<Request> generate(const WorkloadSpec& spec) {
  spec.validate();
  std::vector<RateStep> steps = spec.rate_steps;
  if (steps.empty()) {
    steps.push_back({0.0, spec.request_rate});
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<Request> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double end = i + 1 < steps.size()
                           ? std::min(steps[i + 1].start, spec.duration)
                           : spec.duration;
    std::exponential_distribution<double> gap(steps[i].rate);
    // Exponential gaps are memoryless, so restarting at the step boundary
    // keeps the process Poisson within each step.
    double t = steps[i].start;
    for (;;) {
      t += gap(rng);
      if (t >= end) {
        break;
      }
      Request r;
      r.id = static_cast<RequestId>(out.size());
      r.arrival_time = t;
      r.input_len = spec.input_len_dist.sample(rng);
      r.output_len = spec.output_len_dist.sample(rng);
      r.app = spec.name;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<Request> parse_trace(std::istream& in) {
  std::vector<Request> out;
  std::string line;
  std::size_t line_no = 0;
  double last_arrival = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!rec.is_object()) {
      throw ParseError(line_no, "record must be a JSON object");
    }
    for (const auto& item : rec.items()) {
      const std::string& k = item.key();
      if (k != "arrival_time" && k != "input_len" && k != "output_len" &&
          k != "app") {
        throw SchemaError(line_no, k, "unknown field");
      }
    }
    auto number = [&](const char* field) -> const nlohmann::json& {
      if (!rec.contains(field)) {
        throw SchemaError(line_no, field, "required field missing");
      }
      const auto& v = rec.at(field);
      if (!v.is_number()) {
        throw SchemaError(line_no, field, "expected a number");
      }
      return v;
    };
    auto length = [&](const char* field) {
      const auto& v = number(field);
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw SchemaError(line_no, field, "must be an integer >= 1");
      }
      return v.get<std::int64_t>();
    };
    Request r;
    r.id = static_cast<RequestId>(out.size());
    r.arrival_time = number("arrival_time").get<double>();
    if (!std::isfinite(r.arrival_time) || r.arrival_time < 0.0) {
      throw SchemaError(line_no, "arrival_time", "must be finite and >= 0");
    }
    if (r.arrival_time < last_arrival) {
      throw SchemaError(line_no, "arrival_time",
                        "arrival times must be non-decreasing");
    }
    last_arrival = r.arrival_time;
    r.input_len = length("input_len");
    r.output_len = length("output_len");
    if (rec.contains("app")) {
      if (!rec.at("app").is_string()) {
        throw SchemaError(line_no, "app", "expected a string");
      }
      r.app = rec.at("app").get<std::string>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Request> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("workload.trace", "cannot open '" + path + "'");
  }
  return parse_trace(in);
}

void write_trace(std::ostream& out, const std::vector<Request>& requests) {
  for (const Request& r : requests) {
    nlohmann::json rec = {{"arrival_time", r.arrival_time},
                          {"input_len", r.input_len},
                          {"output_len", r.output_len}};
    if (!r.app.empty()) {
      rec["app"] = r.app;
    }
    out << rec.dump() << '\n';
  }
}

}  // namespace padg
