#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hapstack/encoder.hpp"
#include "hapstack/model_io.hpp"
#include "hapstack/wordpiece.hpp"

namespace hapstack::testing {

// [PAD] [UNK] [CLS] [SEP] shame ##less ##ly bad
inline std::vector<std::string> eight_tokens() {
  return {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "shame", "##less", "##ly", "bad"};
}

inline Vocabulary tiny_vocab() {
  auto t = eight_tokens();
  for (const char* extra : {"those", "people", "are", "very", "nice", "indeed", ".", "##s"}) t.emplace_back(extra);
  return Vocabulary(t);
}

inline EncoderConfig tiny_config(std::size_t vocab = 16, std::size_t positions = 16) {
  EncoderConfig c;
  c.num_layers = 2;
  c.num_heads = 2;
  c.hidden_size = 8;
  c.intermediate_size = 16;
  c.vocab_size = vocab;
  c.max_positions = positions;
  return c;
}

// Small model over the synthetic vocabulary so arbitrary ASCII text scores.
ModelBundle small_model(std::uint64_t seed = 1, std::size_t layers = 2);

// [CLS] random ids [SEP], then `pad` [PAD]s; ids drawn from [4, vocab).
TokenizedSequence random_sequence(std::mt19937_64& rng, std::size_t real_tokens, std::size_t pad,
                                  std::size_t vocab);

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

 private:
  std::filesystem::path dir_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& contents);

}  // namespace hapstack::testing
