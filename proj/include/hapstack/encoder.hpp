#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hapstack/tensor.hpp"
#include "hapstack/wordpiece.hpp"

namespace hapstack {

enum class Activation { kGelu };

struct EncoderConfig {
  std::size_t num_layers = 4;
  std::size_t num_heads = 12;
  std::size_t hidden_size = 576;
  std::size_t intermediate_size = 768;
  std::size_t vocab_size = 30522;
  std::size_t max_positions = 512;
  Activation activation = Activation::kGelu;
  double layernorm_epsilon = 1e-12;
  std::size_t num_labels = 2;

  std::size_t head_dim() const { return hidden_size / num_heads; }

  // The small 4-layer classifier architecture: (4, 12, 576, 768).
  static EncoderConfig piccolo(std::size_t vocab_size = 30522, std::size_t max_positions = 512);
  // The BERT-base reference architecture: (12, 12, 768, 3072).
  static EncoderConfig bert_base(std::size_t vocab_size = 30522, std::size_t max_positions = 512);

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Throws Error{kInvalidConfig}.
void validate(const EncoderConfig& config);

// "layers,heads,hidden,intermediate,vocab,positions"; trailing fields may be
// omitted and fall back to piccolo() defaults.
EncoderConfig parse_config_spec(const std::string& spec);
std::string describe(const EncoderConfig& config);

struct LayerWeights {
  Tensor query_weight, query_bias;
  Tensor key_weight, key_bias;
  Tensor value_weight, value_bias;
  Tensor attention_output_weight, attention_output_bias;
  Tensor attention_norm_gamma, attention_norm_beta;
  Tensor ffn_up_weight, ffn_up_bias;
  Tensor ffn_down_weight, ffn_down_bias;
  Tensor ffn_norm_gamma, ffn_norm_beta;

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

// Linear weights are stored [in x out] so that y = x * W + b.
struct ModelWeights {
  Tensor token_embedding;     // [vocab x hidden]
  Tensor position_embedding;  // [positions x hidden]
  Tensor embedding_norm_gamma, embedding_norm_beta;
  std::vector<LayerWeights> layers;
  Tensor pooler_weight, pooler_bias;
  Tensor classifier_weight, classifier_bias;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  bool is_norm_gamma = false;
  bool is_norm_beta = false;
};

// Canonical tensor order and shapes for a config. Serialization, random
// initialization and parameter counting all walk this list.
std::vector<TensorSpec> tensor_specs(const EncoderConfig& config);

// Tensors of `weights` in tensor_specs order. Allocates the layer list if it
// is shorter than config.num_layers.
std::vector<Tensor*> tensor_slots(ModelWeights& weights, const EncoderConfig& config);
std::vector<const Tensor*> tensor_slots(const ModelWeights& weights, const EncoderConfig& config);

// Throws Error{kShapeMismatch} or Error{kNonFinite}.
void validate(const ModelWeights& weights, const EncoderConfig& config);

// N(0, 0.02) for every matrix and bias, gamma = 1 and beta = 0 for norms.
ModelWeights init_random(const EncoderConfig& config, std::uint64_t seed);

std::uint64_t count_parameters(const EncoderConfig& config);

struct ForwardOptions {
  bool capture_attentions = true;
  // Run the single-threaded reference kernels instead of the parallel ones.
  bool serial_kernels = false;
};

struct ForwardOutput {
  std::vector<float> logits;        // [num_labels]
  Tensor attentions;                // [layers x heads x T x T], empty if not captured
  Tensor final_hidden;              // [T x hidden]

  std::size_t seq_len() const { return final_hidden.rows(); }
  std::span<const float> attention(std::size_t layer, std::size_t head) const;
};

// Throws Error{kIdOutOfRange}, Error{kSequenceTooLong} or
// Error{kShapeMismatch} for malformed sequences.
ForwardOutput forward(const TokenizedSequence& seq, const ModelWeights& weights,
                      const EncoderConfig& config, const ForwardOptions& options = {});

// Runs equal-length sequences as one stacked batch. Per-sequence results match
// forward() because padded columns receive exactly zero attention.
// Throws Error{kInconsistentBatch} when lengths differ.
std::vector<ForwardOutput> forward_batch(std::span<const TokenizedSequence> seqs,
                                         const ModelWeights& weights,
                                         const EncoderConfig& config,
                                         const ForwardOptions& options = {});

}  // namespace hapstack
