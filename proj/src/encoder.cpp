#include "hapstack/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hapstack/error.hpp"
#include "hapstack/kernels.hpp"

namespace hapstack {

EncoderConfig EncoderConfig::piccolo(std::size_t vocab_size, std::size_t max_positions) {
  EncoderConfig c;
  c.num_layers = 4;
  c.num_heads = 12;
  c.hidden_size = 576;
  c.intermediate_size = 768;
  c.vocab_size = vocab_size;
  c.max_positions = max_positions;
  return c;
}

EncoderConfig EncoderConfig::bert_base(std::size_t vocab_size, std::size_t max_positions) {
  EncoderConfig c;
  c.num_layers = 12;
  c.num_heads = 12;
  c.hidden_size = 768;
  c.intermediate_size = 3072;
  c.vocab_size = vocab_size;
  c.max_positions = max_positions;
  return c;
}

void validate(const EncoderConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (c.num_layers == 0 || c.num_heads == 0 || c.hidden_size == 0 ||
      c.intermediate_size == 0 || c.vocab_size == 0 || c.num_labels == 0) {
    fail("all dimensions must be positive: " + describe(c));
  }
  if (c.hidden_size % c.num_heads != 0) {
    fail("hidden_size " + std::to_string(c.hidden_size) + " not divisible by num_heads " +
         std::to_string(c.num_heads));
  }
  if (c.max_positions < 2) fail("max_positions must be at least 2");
  if (!(c.layernorm_epsilon > 0.0) || !std::isfinite(c.layernorm_epsilon)) {
    fail("layernorm_epsilon must be positive");
  }
}

EncoderConfig parse_config_spec(const std::string& spec) {
  EncoderConfig c = EncoderConfig::piccolo();
  std::size_t* fields[] = {&c.num_layers, &c.num_heads, &c.hidden_size,
                           &c.intermediate_size, &c.vocab_size, &c.max_positions};
  std::stringstream ss(spec);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= std::size(fields)) {
      throw Error(ErrorCode::kInvalidConfig, "too many fields in config '" + spec + "'");
    }
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      *fields[i++] = static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidConfig, "bad config field '" + item + "' in '" + spec + "'");
    }
  }
  validate(c);
  return c;
}

std::string describe(const EncoderConfig& c) {
  std::ostringstream out;
  out << c.num_layers << ',' << c.num_heads << ',' << c.hidden_size << ','
      << c.intermediate_size;
  return out.str();
}

std::vector<TensorSpec> tensor_specs(const EncoderConfig& c) {
  const std::size_t h = c.hidden_size;
  const std::size_t f = c.intermediate_size;
  std::vector<TensorSpec> specs;
  auto add = [&specs](std::string name, std::vector<std::size_t> shape, bool gamma = false,
                      bool beta = false) {
    specs.push_back({std::move(name), std::move(shape), gamma, beta});
  };
  add("embeddings.token", {c.vocab_size, h});
  add("embeddings.position", {c.max_positions, h});
  add("embeddings.norm.gamma", {h}, true);
  add("embeddings.norm.beta", {h}, false, true);
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    add(p + "attention.query.weight", {h, h});
    add(p + "attention.query.bias", {h});
    add(p + "attention.key.weight", {h, h});
    add(p + "attention.key.bias", {h});
    add(p + "attention.value.weight", {h, h});
    add(p + "attention.value.bias", {h});
    add(p + "attention.output.weight", {h, h});
    add(p + "attention.output.bias", {h});
    add(p + "attention.norm.gamma", {h}, true);
    add(p + "attention.norm.beta", {h}, false, true);
    add(p + "ffn.up.weight", {h, f});
    add(p + "ffn.up.bias", {f});
    add(p + "ffn.down.weight", {f, h});
    add(p + "ffn.down.bias", {h});
    add(p + "ffn.norm.gamma", {h}, true);
    add(p + "ffn.norm.beta", {h}, false, true);
  }
  add("pooler.weight", {h, h});
  add("pooler.bias", {h});
  add("classifier.weight", {h, c.num_labels});
  add("classifier.bias", {c.num_labels});
  return specs;
}

namespace {

template <typename W, typename T>
std::vector<T*> collect_slots(W& w, std::size_t num_layers) {
  std::vector<T*> s = {&w.token_embedding, &w.position_embedding, &w.embedding_norm_gamma,
                       &w.embedding_norm_beta};
  for (std::size_t l = 0; l < num_layers; ++l) {
    auto& L = w.layers[l];
    for (T* t : {&L.query_weight, &L.query_bias, &L.key_weight, &L.key_bias, &L.value_weight,
                 &L.value_bias, &L.attention_output_weight, &L.attention_output_bias,
                 &L.attention_norm_gamma, &L.attention_norm_beta, &L.ffn_up_weight,
                 &L.ffn_up_bias, &L.ffn_down_weight, &L.ffn_down_bias, &L.ffn_norm_gamma,
                 &L.ffn_norm_beta}) {
      s.push_back(t);
    }
  }
  for (T* t : {&w.pooler_weight, &w.pooler_bias, &w.classifier_weight, &w.classifier_bias}) {
    s.push_back(t);
  }
  return s;
}

}  // namespace

std::vector<Tensor*> tensor_slots(ModelWeights& weights, const EncoderConfig& config) {
  if (weights.layers.size() < config.num_layers) weights.layers.resize(config.num_layers);
  return collect_slots<ModelWeights, Tensor>(weights, config.num_layers);
}

std::vector<const Tensor*> tensor_slots(const ModelWeights& weights, const EncoderConfig& config) {
  if (weights.layers.size() != config.num_layers) {
    throw Error(ErrorCode::kShapeMismatch,
                "weights have " + std::to_string(weights.layers.size()) +
                    " layers, config expects " + std::to_string(config.num_layers));
  }
  return collect_slots<const ModelWeights, const Tensor>(weights, config.num_layers);
}

void validate(const ModelWeights& weights, const EncoderConfig& config) {
  validate(config);
  const auto specs = tensor_specs(config);
  const auto slots = tensor_slots(weights, config);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Tensor& t = *slots[i];
    if (t.shape != specs[i].shape || t.data.size() != Tensor::element_count(specs[i].shape)) {
      throw Error(ErrorCode::kShapeMismatch, "tensor " + specs[i].name + " has wrong shape");
    }
    if (!std::all_of(t.data.begin(), t.data.end(), [](float v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::kNonFinite, "tensor " + specs[i].name + " holds non-finite values");
    }
  }
}

ModelWeights init_random(const EncoderConfig& config, std::uint64_t seed) {
  validate(config);
  ModelWeights weights;
  const auto specs = tensor_specs(config);
  const auto slots = tensor_slots(weights, config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 0.02f);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Tensor& t = *slots[i];
    t = Tensor(specs[i].shape);
    if (specs[i].is_norm_gamma) {
      std::fill(t.data.begin(), t.data.end(), 1.0f);
    } else if (!specs[i].is_norm_beta) {
      for (float& v : t.data) v = normal(rng);
    }
  }
  return weights;
}

std::uint64_t count_parameters(const EncoderConfig& config) {
  validate(config);
  std::uint64_t total = 0;
  for (const auto& spec : tensor_specs(config)) total += Tensor::element_count(spec.shape);
  return total;
}

std::span<const float> ForwardOutput::attention(std::size_t layer, std::size_t head) const {
  const std::size_t t = seq_len();
  const std::size_t heads = attentions.shape.size() == 4 ? attentions.shape[1] : 0;
  return std::span<const float>(attentions.data).subspan((layer * heads + head) * t * t, t * t);
}

namespace {

struct Kernels {
  decltype(&kernels::linear) linear;
  decltype(&kernels::add_inplace) add_inplace;
  decltype(&kernels::layer_norm) layer_norm;
  decltype(&kernels::gelu) gelu;
  decltype(&kernels::tanh_inplace) tanh_inplace;
  decltype(&kernels::attention) attention;
};

constexpr Kernels kParallel{kernels::linear,     kernels::add_inplace, kernels::layer_norm,
                            kernels::gelu,       kernels::tanh_inplace, kernels::attention};
constexpr Kernels kSerial{kernels::serial::linear,       kernels::serial::add_inplace,
                          kernels::serial::layer_norm,   kernels::serial::gelu,
                          kernels::serial::tanh_inplace, kernels::serial::attention};

void check_sequence(const TokenizedSequence& seq, const EncoderConfig& config) {
  if (seq.ids.empty()) throw Error(ErrorCode::kShapeMismatch, "empty sequence");
  if (seq.attention_mask.size() != seq.ids.size()) {
    throw Error(ErrorCode::kShapeMismatch, "attention mask length differs from ids");
  }
  if (seq.ids.size() > config.max_positions) {
    throw Error(ErrorCode::kSequenceTooLong,
                "sequence of " + std::to_string(seq.ids.size()) + " tokens exceeds " +
                    std::to_string(config.max_positions) + " positions");
  }
  for (TokenId id : seq.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw Error(ErrorCode::kIdOutOfRange, "token id " + std::to_string(id) +
                                                " outside vocabulary of " +
                                                std::to_string(config.vocab_size));
    }
  }
}

}  // namespace

ForwardOutput forward(const TokenizedSequence& seq, const ModelWeights& weights,
                      const EncoderConfig& config, const ForwardOptions& options) {
  auto outputs = forward_batch(std::span<const TokenizedSequence>(&seq, 1), weights, config, options);
  return std::move(outputs.front());
}

std::vector<ForwardOutput> forward_batch(std::span<const TokenizedSequence> seqs,
                                         const ModelWeights& weights,
                                         const EncoderConfig& config,
                                         const ForwardOptions& options) {
  if (seqs.empty()) return {};
  const std::size_t seq_len = seqs.front().ids.size();
  for (const auto& s : seqs) {
    check_sequence(s, config);
    if (s.ids.size() != seq_len) {
      throw Error(ErrorCode::kInconsistentBatch,
                  "batch mixes lengths " + std::to_string(seq_len) + " and " +
                      std::to_string(s.ids.size()));
    }
  }
  if (weights.layers.size() != config.num_layers) {
    throw Error(ErrorCode::kShapeMismatch, "weights do not match config layer count");
  }

  const Kernels& k = options.serial_kernels ? kSerial : kParallel;
  const std::size_t batch = seqs.size();
  const std::size_t rows = batch * seq_len;
  const std::size_t hidden = config.hidden_size;
  const std::size_t ffn = config.intermediate_size;
  const std::size_t heads = config.num_heads;
  const auto eps = static_cast<float>(config.layernorm_epsilon);

  std::vector<std::uint8_t> mask(rows);
  std::vector<float> x(rows * hidden);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& s = seqs[b];
    std::copy(s.attention_mask.begin(), s.attention_mask.end(), mask.begin() + b * seq_len);
    for (std::size_t t = 0; t < seq_len; ++t) {
      const auto tok = weights.token_embedding.row(static_cast<std::size_t>(s.ids[t]));
      const auto pos = weights.position_embedding.row(t);
      float* dst = x.data() + (b * seq_len + t) * hidden;
      for (std::size_t d = 0; d < hidden; ++d) dst[d] = tok[d] + pos[d];
    }
  }
  k.layer_norm(x, weights.embedding_norm_gamma.span(), weights.embedding_norm_beta.span(), rows,
               hidden, eps);

  std::vector<ForwardOutput> outputs(batch);
  if (options.capture_attentions) {
    for (auto& o : outputs) o.attentions = Tensor({config.num_layers, heads, seq_len, seq_len});
  }
  std::vector<float> probs(options.capture_attentions ? batch * heads * seq_len * seq_len : 0);
  std::vector<float> q(rows * hidden), key(rows * hidden), val(rows * hidden);
  std::vector<float> ctx(rows * hidden), proj(rows * hidden), up(rows * ffn);

  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const LayerWeights& L = weights.layers[l];
    k.linear(x, L.query_weight.span(), L.query_bias.span(), q, rows, hidden, hidden);
    k.linear(x, L.key_weight.span(), L.key_bias.span(), key, rows, hidden, hidden);
    k.linear(x, L.value_weight.span(), L.value_bias.span(), val, rows, hidden, hidden);
    k.attention(q, key, val, mask, batch, seq_len, hidden, heads, ctx, probs);
    if (options.capture_attentions) {
      const std::size_t block = heads * seq_len * seq_len;
      for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(probs.begin() + static_cast<std::ptrdiff_t>(b * block), block,
                    outputs[b].attentions.data.begin() + static_cast<std::ptrdiff_t>(l * block));
      }
    }
    k.linear(ctx, L.attention_output_weight.span(), L.attention_output_bias.span(), proj, rows,
             hidden, hidden);
    k.add_inplace(x, proj);
    k.layer_norm(x, L.attention_norm_gamma.span(), L.attention_norm_beta.span(), rows, hidden, eps);

    k.linear(x, L.ffn_up_weight.span(), L.ffn_up_bias.span(), up, rows, hidden, ffn);
    k.gelu(up);
    k.linear(up, L.ffn_down_weight.span(), L.ffn_down_bias.span(), proj, rows, ffn, hidden);
    k.add_inplace(x, proj);
    k.layer_norm(x, L.ffn_norm_gamma.span(), L.ffn_norm_beta.span(), rows, hidden, eps);
  }

  // Pooler and classifier read the [CLS] position of each sequence.
  std::vector<float> cls(batch * hidden), pooled(batch * hidden);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(b * seq_len * hidden), hidden,
                cls.begin() + static_cast<std::ptrdiff_t>(b * hidden));
  }
  k.linear(cls, weights.pooler_weight.span(), weights.pooler_bias.span(), pooled, batch, hidden,
           hidden);
  k.tanh_inplace(pooled);
  std::vector<float> logits(batch * config.num_labels);
  k.linear(pooled, weights.classifier_weight.span(), weights.classifier_bias.span(), logits, batch,
           hidden, config.num_labels);

  for (std::size_t b = 0; b < batch; ++b) {
    auto& o = outputs[b];
    o.logits.assign(logits.begin() + static_cast<std::ptrdiff_t>(b * config.num_labels),
                    logits.begin() + static_cast<std::ptrdiff_t>((b + 1) * config.num_labels));
    o.final_hidden = Tensor({seq_len, hidden});
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(b * seq_len * hidden), seq_len * hidden,
                o.final_hidden.data.begin());
  }
  return outputs;
}

}  // namespace hapstack
