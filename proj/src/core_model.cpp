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

#include "padgsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "padgsim/errors.hpp"

namespace padg {

namespace {

std::string join(std::string_view path, std::string_view field) {
  std::string out(path);
  out += '.';
  out += field;
  return out;
}

void require(bool ok, std::string_view path, std::string_view field,
             const std::string& message) {
  if (!ok) {
    throw ValidationError(join(path, field), message);
  }
}

// Share of the per-layer weights read by each linear op (3H^2, H^2, 4H^2 and
// 4H^2 out of 12H^2).
double weight_share(OpKind kind) {
  switch (kind) {
    case OpKind::kQkvProjection:
      return 3.0 / 12.0;
    case OpKind::kOutputProjection:
      return 1.0 / 12.0;
    case OpKind::kDimExpansion:
    case OpKind::kDimReduction:
      return 4.0 / 12.0;
    default:
      return 0.0;
  }
}

bool is_attention(OpKind kind) {
  return kind == OpKind::kAttentionQK || kind == OpKind::kAttentionAV;
}

// FLOPs per token and activation elements per token of the linear ops,
// in units of H^2 and H respectively.
struct LinearCoeffs {
  double flops_h2;
  double act_h;
};

LinearCoeffs linear_coeffs(OpKind kind) {
  switch (kind) {
    case OpKind::kQkvProjection:
      return {6.0, 6.0};
    case OpKind::kOutputProjection:
      return {2.0, 2.0};
    case OpKind::kDimExpansion:
    case OpKind::kDimReduction:
      return {8.0, 2.0};
    default:
      return {0.0, 0.0};
  }
}

double finish(const InstanceConfig& cfg, double layer_time) {
  const double layers = static_cast<double>(cfg.model.layer_num);
  return (layer_time + cfg.per_layer_overhead) * layers *
         (1.0 + cfg.comm_overhead_fraction);
}

// Linear op cost for `tokens` tokens where the weights are charged from
// weights_bytes rather than the H^2 element counts.
OpCost linear_with_weights(const ModelProfile& m, OpKind kind, double tokens) {
  const double h = static_cast<double>(m.hidden_size);
  const double e = static_cast<double>(m.bytes_per_element);
  const LinearCoeffs c = linear_coeffs(kind);
  const double layer_weights =
      m.weights_bytes / static_cast<double>(m.layer_num);
  return {c.flops_h2 * tokens * h * h,
          c.act_h * tokens * h * e + weight_share(kind) * layer_weights};
}

// Decode attention (QK or AV) over `kv_tokens` cached tokens for `batch`
// queries. K or V bytes come from the GQA-aware per-token KV size.
OpCost decode_attention(const ModelProfile& m, double batch, double kv_tokens) {
  const double h = static_cast<double>(m.hidden_size);
  const double heads = static_cast<double>(m.heads);
  const double e = static_cast<double>(m.bytes_per_element);
  const double kv_half_layer = kv_tokens * kv_bytes_per_token(m) /
                               (2.0 * static_cast<double>(m.layer_num));
  return {2.0 * kv_tokens * h,
          (2.0 * kv_tokens * heads + batch * h) * e + kv_half_layer};
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kPrefill:
      return "prefill";
    case Phase::kDecode:
      return "decode";
    case Phase::kIdle:
      return "idle";
  }
  return "?";
}

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kQkvProjection:
      return "qkv_projection";
    case OpKind::kAttentionQK:
      return "attention_qk";
    case OpKind::kAttentionAV:
      return "attention_av";
    case OpKind::kOutputProjection:
      return "output_projection";
    case OpKind::kDimExpansion:
      return "dim_expansion";
    case OpKind::kDimReduction:
      return "dim_reduction";
  }
  return "?";
}

void ModelProfile::validate(std::string_view path) const {
  require(layer_num >= 1, path, "layer_num", "must be >= 1");
  require(hidden_size >= 1, path, "hidden_size", "must be >= 1");
  require(heads >= 1, path, "heads", "must be >= 1");
  require(size_per_head >= 1, path, "size_per_head", "must be >= 1");
  require(kv_groups >= 1, path, "kv_groups", "must be >= 1");
  require(bytes_per_element >= 1, path, "bytes_per_element", "must be >= 1");
  require(hidden_size == heads * size_per_head, path, "hidden_size",
          "must equal heads * size_per_head");
  require(heads % kv_groups == 0, path, "kv_groups", "must divide heads");
  require(std::isfinite(weights_bytes) && weights_bytes > 0.0, path,
          "weights_bytes", "must be > 0");
}

void DeviceProfile::validate(std::string_view path) const {
  require(peak_flops > 0.0, path, "peak_flops", "must be > 0");
  require(mem_bandwidth > 0.0, path, "mem_bandwidth", "must be > 0");
  require(mem_capacity > 0.0, path, "mem_capacity", "must be > 0");
  require(compute_efficiency > 0.0 && compute_efficiency <= 1.0, path,
          "compute_efficiency", "must be in (0, 1]");
  require(bandwidth_efficiency > 0.0 && bandwidth_efficiency <= 1.0, path,
          "bandwidth_efficiency", "must be in (0, 1]");
}

void InstanceConfig::validate(std::string_view path) const {
  model.validate(join(path, "model"));
  device.validate(join(path, "device"));
  require(device_count >= 1, path, "device_count", "must be >= 1");
  require(tp_degree == device_count, path, "tp_degree",
          "must equal device_count (pipeline parallelism is not modeled)");
  require(comm_overhead_fraction >= 0.0, path, "comm_overhead_fraction",
          "must be >= 0");
  require(switch_overhead >= 0.0, path, "switch_overhead", "must be >= 0");
  require(per_layer_overhead >= 0.0, path, "per_layer_overhead",
          "must be >= 0");
  require(per_chunk_overhead >= 0.0, path, "per_chunk_overhead",
          "must be >= 0");
  const double limit = static_cast<double>(device_count) * device.mem_capacity -
                       model.weights_bytes;
  require(kv_capacity_bytes > 0.0, path, "kv_capacity_bytes", "must be > 0");
  require(kv_capacity_bytes <= limit, path, "kv_capacity_bytes",
          "exceeds device memory left after weights");
}

double default_kv_capacity(const ModelProfile& model,
                           const DeviceProfile& device,
                           std::int64_t device_count,
                           double memory_utilization) {
  return memory_utilization * static_cast<double>(device_count) *
             device.mem_capacity -
         model.weights_bytes;
}

OpCost op_cost(const ModelProfile& model, const BatchShape& shape,
               OpKind kind) {
  const double b = static_cast<double>(shape.batch_size);
  const double s = static_cast<double>(shape.seq_len);
  const double h = static_cast<double>(model.hidden_size);
  const double m = static_cast<double>(model.heads);
  const double e = static_cast<double>(model.bytes_per_element);

  double flops = 0.0;
  double elems = 0.0;
  if (shape.phase == Phase::kPrefill) {
    switch (kind) {
      case OpKind::kQkvProjection:
        flops = 6.0 * b * s * h * h;
        elems = 6.0 * b * s * h + 3.0 * h * h;
        break;
      case OpKind::kAttentionQK:
      case OpKind::kAttentionAV:
        flops = 2.0 * b * s * s * h;
        elems = 2.0 * b * s * h + b * s * s * m;
        break;
      case OpKind::kOutputProjection:
        flops = 2.0 * b * s * h * h;
        elems = 2.0 * b * s * h + h * h;
        break;
      case OpKind::kDimExpansion:
      case OpKind::kDimReduction:
        flops = 8.0 * b * s * h * h;
        elems = 2.0 * b * s * h + 4.0 * h * h;
        break;
    }
  } else {
    switch (kind) {
      case OpKind::kQkvProjection:
        flops = 6.0 * b * h * h;
        elems = 6.0 * b * h + 3.0 * h * h;
        break;
      case OpKind::kAttentionQK:
      case OpKind::kAttentionAV:
        flops = 2.0 * b * s * h;
        elems = 2.0 * b * s * m + b * h * (s + 1.0);
        break;
      case OpKind::kOutputProjection:
        flops = 2.0 * b * h * h;
        elems = 2.0 * b * h + h * h;
        break;
      case OpKind::kDimExpansion:
      case OpKind::kDimReduction:
        flops = 8.0 * b * h * h;
        elems = 2.0 * b * h + 4.0 * h * h;
        break;
    }
  }
  return {flops, elems * e};
}

double arithmetic_intensity(const ModelProfile& model, const BatchShape& shape,
                            OpKind kind) {
  const OpCost c = op_cost(model, shape, kind);
  return c.flops / c.bytes;
}

double kv_bytes_per_token(const ModelProfile& model) {
  return 2.0 * static_cast<double>(model.layer_num) *
         static_cast<double>(model.hidden_size / model.kv_groups) *
         static_cast<double>(model.bytes_per_element);
}

double roofline_time(const InstanceConfig& cfg, const OpCost& cost) {
  const double tp = static_cast<double>(cfg.tp_degree);
  const double compute =
      cost.flops / (cfg.device.compute_efficiency * cfg.device.peak_flops * tp);
  const double memory = cost.bytes / (cfg.device.bandwidth_efficiency *
                                      cfg.device.mem_bandwidth * tp);
  return std::max(compute, memory);
}

double prefill_time(const InstanceConfig& cfg, std::int64_t total_tokens) {
  const std::int64_t lens[] = {total_tokens};
  return prefill_batch_time(cfg, lens);
}

double prefill_batch_time(const InstanceConfig& cfg,
                          std::span<const std::int64_t> prompt_lens) {
  std::vector<PrefillChunk> chunks;
  chunks.reserve(prompt_lens.size());
  for (std::int64_t len : prompt_lens) {
    chunks.push_back({len, 0});
  }
  return prefill_chunks_time(cfg, chunks);
}

double prefill_chunks_time(const InstanceConfig& cfg,
                           std::span<const PrefillChunk> chunks) {
  std::int64_t total = 0;
  for (const PrefillChunk& c : chunks) {
    if (c.new_tokens < 1 || c.prior_tokens < 0) {
      throw ValidationError("prefill.total_tokens", "must be >= 1");
    }
    total += c.new_tokens;
  }
  if (total < 1) {
    throw ValidationError("prefill.total_tokens", "must be >= 1");
  }
  const ModelProfile& m = cfg.model;
  const double h = static_cast<double>(m.hidden_size);
  const double heads = static_cast<double>(m.heads);
  const double e = static_cast<double>(m.bytes_per_element);
  const double kv_half_layer_per_token =
      kv_bytes_per_token(m) / (2.0 * static_cast<double>(m.layer_num));

  double layer = 0.0;
  for (OpKind kind : kAllOps) {
    if (!is_attention(kind)) {
      // Linear ops depend on B*S only, so the batch is one long sequence.
      layer +=
          roofline_time(cfg, op_cost(m, {Phase::kPrefill, 1, total}, kind));
      continue;
    }
    OpCost sum;
    for (const PrefillChunk& c : chunks) {
      if (c.prior_tokens == 0) {
        sum += op_cost(m, {Phase::kPrefill, 1, c.new_tokens}, kind);
        continue;
      }
      const double n = static_cast<double>(c.new_tokens);
      const double ctx = static_cast<double>(c.prior_tokens) + n;
      sum += OpCost{2.0 * n * ctx * h, (2.0 * n * h + n * ctx * heads) * e +
                                           static_cast<double>(c.prior_tokens) *
                                               kv_half_layer_per_token};
    }
    layer += roofline_time(cfg, sum);
  }
  return finish(cfg, layer);
}

double decode_step_time(const InstanceConfig& cfg, std::int64_t batch_size,
                        std::int64_t total_kv_tokens) {
  if (batch_size < 1) {
    throw ValidationError("decode.batch_size", "must be >= 1");
  }
  if (total_kv_tokens < batch_size) {
    throw ValidationError("decode.total_kv_tokens", "must be >= batch_size");
  }
  return hybrid_iteration_time(cfg, batch_size, total_kv_tokens, {});
}

double hybrid_iteration_time(const InstanceConfig& cfg,
                             std::int64_t decode_batch,
                             std::int64_t decode_kv_tokens,
                             std::span<const PrefillChunk> chunks) {
  const ModelProfile& m = cfg.model;
  const double h = static_cast<double>(m.hidden_size);
  const double heads = static_cast<double>(m.heads);
  const double e = static_cast<double>(m.bytes_per_element);
  const double kv_half_layer_per_token =
      kv_bytes_per_token(m) / (2.0 * static_cast<double>(m.layer_num));

  double tokens = static_cast<double>(decode_batch);
  std::int64_t reread_chunks = 0;
  for (const PrefillChunk& c : chunks) {
    tokens += static_cast<double>(c.new_tokens);
    if (c.prior_tokens > 0) {
      ++reread_chunks;
    }
  }
  if (tokens < 1.0) {
    throw ValidationError("iteration.tokens", "must carry at least one token");
  }

  double layer = 0.0;
  for (OpKind kind : kAllOps) {
    if (!is_attention(kind)) {
      layer += roofline_time(cfg, linear_with_weights(m, kind, tokens));
      continue;
    }
    OpCost sum;
    if (decode_batch > 0) {
      sum += decode_attention(m, static_cast<double>(decode_batch),
                              static_cast<double>(decode_kv_tokens));
    }
    for (const PrefillChunk& c : chunks) {
      const double n = static_cast<double>(c.new_tokens);
      const double ctx = static_cast<double>(c.prior_tokens) + n;
      sum += OpCost{2.0 * n * ctx * h, (2.0 * n * h + n * ctx * heads) * e +
                                           static_cast<double>(c.prior_tokens) *
                                               kv_half_layer_per_token};
    }
    layer += roofline_time(cfg, sum);
  }
  return finish(cfg, layer) +
         static_cast<double>(reread_chunks) * cfg.per_chunk_overhead;
}

double required_kv_bandwidth(const ModelProfile& model,
                             double prefill_token_rate) {
  if (prefill_token_rate < 0.0) {
    throw ValidationError("prefill_token_rate", "must be >= 0");
  }
  return prefill_token_rate * kv_bytes_per_token(model);
}

double steady_prefill_rate(const InstanceConfig& cfg) {
  const std::vector<std::int64_t> lens(kSteadyPromptsPerBatch,
                                       kSteadyPromptLen);
  return static_cast<double>(kSteadyPromptLen * kSteadyPromptsPerBatch) /
         prefill_batch_time(cfg, lens);
}

double calibrate_compute_efficiency(InstanceConfig cfg, double instances,
                                    double target_rate) {
  auto rate_at = [&](double eff) {
    cfg.device.compute_efficiency = eff;
    return instances * steady_prefill_rate(cfg);
  };
  double lo = 1e-4;
  double hi = 1.0;
  if (rate_at(hi) < target_rate) {
    throw ValidationError("calibration.target_rate",
                          "unreachable even at compute_efficiency = 1");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) < target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace padg
