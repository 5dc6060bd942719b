#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <random>

#include "hapstack/encoder.hpp"
#include "hapstack/error.hpp"
#include "support/fixtures.hpp"
#include "support/reference_encoder.hpp"

using namespace hapstack;
using hapstack::testing::random_sequence;
using hapstack::testing::tiny_config;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected hapstack::Error");
  return ErrorCode::kIo;
}

// Rescales the non-norm tensors to std 0.5 so that input changes survive the
// 0.02-scale pooler and classifier and show up clearly in the logits.
ModelWeights amplified(ModelWeights w, const EncoderConfig& cfg) {
  const auto specs = tensor_specs(cfg);
  const auto slots = tensor_slots(w, cfg);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].is_norm_gamma || specs[i].is_norm_beta) continue;
    for (float& v : slots[i]->data) v *= 25.0f;
  }
  return w;
}

}  // namespace

TEST_CASE("init_random is deterministic and seed dependent") {
  const auto cfg = tiny_config();
  const auto a = init_random(cfg, 7);
  const auto b = init_random(cfg, 7);
  const auto c = init_random(cfg, 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.token_embedding.shape == std::vector<std::size_t>{16, 8});
  CHECK(a.layers.size() == 2);
  for (float g : a.layers[1].ffn_norm_gamma.data) CHECK(g == 1.0f);
  for (float g : a.layers[1].ffn_norm_beta.data) CHECK(g == 0.0f);
}

TEST_CASE("init_random draws at scale 0.02") {
  auto cfg = tiny_config(512, 64);
  cfg.hidden_size = 64;
  cfg.num_heads = 4;
  const auto w = init_random(cfg, 1);
  double sum = 0, sq = 0;
  for (float v : w.token_embedding.data) {
    sum += v;
    sq += double(v) * v;
  }
  const double n = static_cast<double>(w.token_embedding.size());
  CHECK(std::fabs(sum / n) < 1e-3);
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("config validation") {
  auto cfg = tiny_config();
  cfg.num_heads = 3;
  CHECK(code_of([&] { validate(cfg); }) == ErrorCode::kInvalidConfig);
  cfg = tiny_config();
  cfg.max_positions = 1;
  CHECK(code_of([&] { validate(cfg); }) == ErrorCode::kInvalidConfig);
  CHECK(parse_config_spec("4,12,576,768") == EncoderConfig::piccolo());
  CHECK(parse_config_spec("12,12,768,3072,30522,512") == EncoderConfig::bert_base());
  CHECK(code_of([] { parse_config_spec("4,x,576"); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { parse_config_spec("4,5,576"); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("count_parameters matches hand-summed shapes") {
  EncoderConfig c;
  c.num_layers = 1;
  c.num_heads = 1;
  c.hidden_size = 2;
  c.intermediate_size = 4;
  c.vocab_size = 4;
  c.max_positions = 4;
  c.num_labels = 2;
  // embeddings 16, LN 4, attention 24, attention LN 4, FFN 22, FFN LN 4,
  // pooler 6, classifier 6.
  CHECK(count_parameters(c) == 86);
  CHECK(count_parameters(tiny_config()) == 1562);
  CHECK(count_parameters(EncoderConfig::piccolo(30000, 512)) == 26780738);
  CHECK(count_parameters(EncoderConfig::bert_base(30000, 512)) == 109081346);
  auto doubled = tiny_config();
  doubled.num_layers *= 2;
  CHECK(count_parameters(doubled) > count_parameters(tiny_config()));
}

TEST_CASE("single-token attention is [[1]]") {
  const auto cfg = tiny_config();
  const auto w = init_random(cfg, 3);
  TokenizedSequence s;
  s.ids = {2};
  s.attention_mask = {1};
  const auto out = forward(s, w, cfg);
  REQUIRE(out.attentions.shape == std::vector<std::size_t>{2, 2, 1, 1});
  for (float a : out.attentions.data) CHECK(a == 1.0f);
}

TEST_CASE("forward matches the scalar reference") {
  const auto cfg = tiny_config();
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = init_random(cfg, seed);
    for (int i = 0; i < 5; ++i) {
      const std::size_t real = 1 + rng() % 10;
      const auto seq = random_sequence(rng, real, rng() % 4, cfg.vocab_size);
      const auto got = forward(seq, w, cfg);
      const auto want = testing::reference_forward(seq, w, cfg);
      for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(got.logits[k] - want.logits[k]) < 1e-5);
      for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        for (std::size_t h = 0; h < cfg.num_heads; ++h) {
          const auto a = got.attention(l, h);
          for (std::size_t r = 0; r < seq.length(); ++r) {
            for (std::size_t c = 0; c < seq.length(); ++c) {
              CHECK(std::fabs(a[r * seq.length() + c] - want.attentions[l][h][r][c]) < 1e-5);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("serial kernels agree with parallel kernels end to end") {
  const auto cfg = tiny_config();
  const auto w = init_random(cfg, 5);
  std::mt19937_64 rng(5);
  const auto seq = random_sequence(rng, 9, 2, cfg.vocab_size);
  const auto fast = forward(seq, w, cfg);
  const auto slow = forward(seq, w, cfg, {.capture_attentions = true, .serial_kernels = true});
  for (std::size_t k = 0; k < 2; ++k) CHECK(fast.logits[k] == doctest::Approx(slow.logits[k]).epsilon(1e-5));
}

TEST_CASE("attention rows are stochastic and ignore padding") {
  const auto cfg = tiny_config();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto w = init_random(cfg, static_cast<std::uint64_t>(trial));
    const std::size_t real = 1 + rng() % 8;
    const auto seq = random_sequence(rng, real, 1 + rng() % 5, cfg.vocab_size);
    const auto out = forward(seq, w, cfg);
    const std::size_t t = seq.length();
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      for (std::size_t h = 0; h < cfg.num_heads; ++h) {
        const auto a = out.attention(l, h);
        for (std::size_t r = 0; r < t; ++r) {
          double sum = 0;
          for (std::size_t c = 0; c < t; ++c) sum += a[r * t + c];
          CHECK(std::fabs(sum - 1.0) <= 1e-6);
          for (std::size_t c = seq.real_length(); c < t; ++c) CHECK(a[r * t + c] <= 1e-7f);
        }
      }
    }
  }
}

TEST_CASE("appending padding does not move logits") {
  const auto cfg = tiny_config();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = init_random(cfg, 100 + static_cast<std::uint64_t>(trial));
    auto seq = random_sequence(rng, 2 + rng() % 8, 0, cfg.vocab_size);
    const auto base = forward(seq, w, cfg);
    pad_to(seq, seq.length() + 1 + rng() % 5, 0);
    const auto padded = forward(seq, w, cfg);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(base.logits[k] - padded.logits[k]) <= 1e-5f);
  }
}

TEST_CASE("position embeddings make order matter") {
  const auto cfg = tiny_config();
  std::mt19937_64 rng(41);
  bool differs = false;
  for (int trial = 0; trial < 20 && !differs; ++trial) {
    const auto w = amplified(init_random(cfg, static_cast<std::uint64_t>(trial)), cfg);
    auto seq = random_sequence(rng, 6, 0, cfg.vocab_size);
    if (seq.ids[1] == seq.ids[2]) continue;
    const auto a = forward(seq, w, cfg);
    std::swap(seq.ids[1], seq.ids[2]);
    const auto b = forward(seq, w, cfg);
    differs = std::fabs(a.logits[0] - b.logits[0]) > 1e-3f || std::fabs(a.logits[1] - b.logits[1]) > 1e-3f;
  }
  CHECK(differs);
}

TEST_CASE("forward is bitwise deterministic") {
  const auto cfg = tiny_config();
  const auto w = init_random(cfg, 9);
  std::mt19937_64 rng(9);
  const auto seq = random_sequence(rng, 10, 3, cfg.vocab_size);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = forward(seq, w, cfg);
  const auto b = forward(seq, w, cfg);
  omp_set_num_threads(saved);
  CHECK(std::memcmp(a.logits.data(), b.logits.data(), 2 * sizeof(float)) == 0);
}

TEST_CASE("forward_batch equals per-sequence forward") {
  const auto cfg = tiny_config();
  const auto w = init_random(cfg, 12);
  std::mt19937_64 rng(12);

  SUBCASE("batch of one") {
    const auto s = random_sequence(rng, 5, 0, cfg.vocab_size);
    const auto batch = forward_batch(std::span(&s, 1), w, cfg);
    const auto single = forward(s, w, cfg);
    CHECK(batch[0].logits == single.logits);
  }
  SUBCASE("mixed real lengths") {
    const auto a = random_sequence(rng, 3, 5, cfg.vocab_size);
    const auto b = random_sequence(rng, 8, 0, cfg.vocab_size);
    const std::vector<TokenizedSequence> seqs{a, b};
    const auto batch = forward_batch(seqs, w, cfg);
    TokenizedSequence a_unpadded = a;
    a_unpadded.ids.resize(3);
    a_unpadded.attention_mask.resize(3);
    const auto ra = forward(a_unpadded, w, cfg);
    const auto rb = forward(b, w, cfg);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::fabs(batch[0].logits[k] - ra.logits[k]) <= 1e-5f);
      CHECK(std::fabs(batch[1].logits[k] - rb.logits[k]) <= 1e-5f);
    }
  }
  SUBCASE("empty batch") {
    CHECK(forward_batch(std::span<const TokenizedSequence>{}, w, cfg).empty());
  }
  SUBCASE("inconsistent lengths") {
    const std::vector<TokenizedSequence> seqs{random_sequence(rng, 3, 0, 16), random_sequence(rng, 4, 0, 16)};
    CHECK(code_of([&] { forward_batch(seqs, w, cfg); }) == ErrorCode::kInconsistentBatch);
  }
}

TEST_CASE("forward errors") {
  const auto cfg = tiny_config();
  const auto w = init_random(cfg, 1);
  TokenizedSequence s;
  s.ids = {2, 16, 3};
  s.attention_mask = {1, 1, 1};
  CHECK(code_of([&] { forward(s, w, cfg); }) == ErrorCode::kIdOutOfRange);
  s.ids.assign(17, 4);
  s.attention_mask.assign(17, 1);
  CHECK(code_of([&] { forward(s, w, cfg); }) == ErrorCode::kSequenceTooLong);
}

TEST_CASE("validate rejects bad weights") {
  const auto cfg = tiny_config();
  auto w = init_random(cfg, 1);
  w.pooler_bias.data[0] = std::nanf("");
  CHECK(code_of([&] { validate(w, cfg); }) == ErrorCode::kNonFinite);
  w = init_random(cfg, 1);
  w.layers[0].ffn_up_weight = Tensor({8, 15});
  CHECK(code_of([&] { validate(w, cfg); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("forward matches the scalar reference with large weights") {
  const auto cfg = tiny_config();
  std::mt19937_64 rng(7);
  double worst = 0, largest = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = amplified(init_random(cfg, seed), cfg);
    for (int i = 0; i < 5; ++i) {
      const auto seq = random_sequence(rng, 1 + rng() % 10, rng() % 4, cfg.vocab_size);
      const auto got = forward(seq, w, cfg);
      const auto want = testing::reference_forward(seq, w, cfg);
      for (std::size_t k = 0; k < 2; ++k) {
        worst = std::max(worst, std::fabs(got.logits[k] - want.logits[k]));
        largest = std::max(largest, std::fabs(want.logits[k]));
      }
    }
  }
  MESSAGE("largest logit " << largest << ", worst error " << worst);
  CHECK(largest > 1.0);
  CHECK(worst <= 1e-5);
}
