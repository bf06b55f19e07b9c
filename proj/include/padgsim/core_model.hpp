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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace padg {

inline constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;
inline constexpr double kMiB = 1024.0 * 1024.0;

enum class Phase { kPrefill, kDecode, kIdle };

std::string_view to_string(Phase phase);

// The six matrix multiplications that dominate a transformer layer.
enum class OpKind {
  kQkvProjection,
  kAttentionQK,
  kAttentionAV,
  kOutputProjection,
  kDimExpansion,
  kDimReduction,
};

inline constexpr std::array<OpKind, 6> kAllOps = {
    OpKind::kQkvProjection,    OpKind::kAttentionQK,  OpKind::kAttentionAV,
    OpKind::kOutputProjection, OpKind::kDimExpansion, OpKind::kDimReduction,
};

std::string_view to_string(OpKind kind);

struct ModelProfile {
  std::string name;
  std::int64_t layer_num = 0;
  std::int64_t hidden_size = 0;
  std::int64_t heads = 0;
  std::int64_t size_per_head = 0;
  // Query heads per KV head; 1 is plain multi-head attention.
  std::int64_t kv_groups = 1;
  std::int64_t bytes_per_element = 2;
  double weights_bytes = 0.0;

  // Throws ValidationError (path prefixed with `path`) on a broken invariant.
  void validate(std::string_view path = "model") const;
};

struct DeviceProfile {
  std::string name;
  double peak_flops = 0.0;     // FLOP/s
  double mem_bandwidth = 0.0;  // bytes/s
  double mem_capacity = 0.0;   // bytes
  double compute_efficiency = 1.0;
  double bandwidth_efficiency = 1.0;

  void validate(std::string_view path = "device") const;
};

struct InstanceConfig {
  ModelProfile model;
  DeviceProfile device;
  std::int64_t device_count = 1;
  std::int64_t tp_degree = 1;
  // Extra time per layer spent in tensor-parallel all-reduce, as a fraction
  // of the compute/memory time.
  double comm_overhead_fraction = 0.0;
  double kv_capacity_bytes = 0.0;
  // Cost of one prefill <-> decode transition.
  double switch_overhead = 0.0;
  // Absorbs softmax, layer norm and sampling; zero by default.
  double per_layer_overhead = 0.0;
  // Fixed cost of each prefill chunk after the first in hybrid batching.
  double per_chunk_overhead = 0.0;

  void validate(std::string_view path = "instance") const;
};

// Largest KV pool that fits next to the weights at the given memory
// utilization fraction.
double default_kv_capacity(const ModelProfile& model,
                           const DeviceProfile& device,
                           std::int64_t device_count,
                           double memory_utilization = 0.9);

struct BatchShape {
  Phase phase = Phase::kPrefill;  // kPrefill or kDecode
  std::int64_t batch_size = 1;
  // Per-request context length; for decode, the mean KV length.
  std::int64_t seq_len = 1;
};

struct OpCost {
  double flops = 0.0;
  double bytes = 0.0;

  OpCost& operator+=(const OpCost& other) {
    flops += other.flops;
    bytes += other.bytes;
    return *this;
  }
};

// Per-layer FLOPs and memory traffic of one operation, straight from the
// arithmetic-intensity table. Memory element counts are scaled by
// bytes_per_element.
OpCost op_cost(const ModelProfile& model, const BatchShape& shape, OpKind kind);

// FLOPs per byte of op_cost.
double arithmetic_intensity(const ModelProfile& model, const BatchShape& shape,
                            OpKind kind);

// K and V for one token across all layers: 2 * L * (H / kv_groups) * e.
double kv_bytes_per_token(const ModelProfile& model);

// Roofline time of one op on the instance (tensor-parallel devices share the
// work evenly). Communication overhead is not applied here.
double roofline_time(const InstanceConfig& cfg, const OpCost& cost);

// Duration of a prefill over one sequence of `total_tokens` tokens.
double prefill_time(const InstanceConfig& cfg, std::int64_t total_tokens);

// Duration of one prefill batch holding several prompts. Linear layers see the
// concatenated tokens; attention is evaluated per prompt. Never exceeds the sum
// of prefill_time over the prompts.
double prefill_batch_time(const InstanceConfig& cfg,
                          std::span<const std::int64_t> prompt_lens);

// A slice of a prompt processed in one batch or iteration.
struct PrefillChunk {
  std::int64_t new_tokens = 0;
  std::int64_t prior_tokens = 0;  // tokens of this prompt already in KV
};

// Prefill batch made of prompt slices. A slice with prior tokens attends to
// them and re-reads their KV. Equals prefill_batch_time when no slice has
// prior tokens.
double prefill_chunks_time(const InstanceConfig& cfg,
                           std::span<const PrefillChunk> chunks);

// One decode iteration for `batch_size` requests holding `total_kv_tokens`
// KV entries in total. Charges the full weights and the full KV per step.
double decode_step_time(const InstanceConfig& cfg, std::int64_t batch_size,
                        std::int64_t total_kv_tokens);

// One hybrid (chunked-prefill) iteration: decodes plus prefill chunks share
// the linear layers; each chunk re-reads its prompt's KV written so far.
double hybrid_iteration_time(const InstanceConfig& cfg,
                             std::int64_t decode_batch,
                             std::int64_t decode_kv_tokens,
                             std::span<const PrefillChunk> chunks);

// Bytes/s needed to ship the KV produced by a prefill stream.
double required_kv_bandwidth(const ModelProfile& model,
                             double prefill_token_rate);

// Reference shape for steady prefill streams: batches of 8 prompts x 512.
inline constexpr std::int64_t kSteadyPromptLen = 512;
inline constexpr std::int64_t kSteadyPromptsPerBatch = 8;

// Tokens/s of back-to-back reference prefill batches on one instance.
double steady_prefill_rate(const InstanceConfig& cfg);

// Bisects compute_efficiency in (0, 1] so that `instances` copies of `cfg`
// sustain `target_rate` tokens/s. Returns the fitted efficiency.
double calibrate_compute_efficiency(InstanceConfig cfg, double instances,
                                    double target_rate);

}  // namespace padg
