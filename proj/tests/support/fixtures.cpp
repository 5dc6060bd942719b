#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "hapstack/synthetic.hpp"

namespace hapstack::testing {

ModelBundle small_model(std::uint64_t seed, std::size_t layers) {
  EncoderConfig c;
  c.num_layers = layers;
  c.num_heads = 2;
  c.hidden_size = 16;
  c.intermediate_size = 32;
  c.vocab_size = 400;
  c.max_positions = 64;
  return ModelBundle{c, init_random(c, seed), synthetic::make_vocab(c.vocab_size)};
}

TokenizedSequence random_sequence(std::mt19937_64& rng, std::size_t real_tokens, std::size_t pad,
                                  std::size_t vocab) {
  std::uniform_int_distribution<TokenId> pick(4, static_cast<TokenId>(vocab - 1));
  TokenizedSequence s;
  s.ids.push_back(2);
  for (std::size_t i = 2; i < real_tokens; ++i) s.ids.push_back(pick(rng));
  if (real_tokens >= 2) s.ids.push_back(3);
  s.attention_mask.assign(s.ids.size(), 1);
  pad_to(s, s.ids.size() + pad, 0);
  return s;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  dir_ = std::filesystem::temp_directory_path() /
         ("hapstack-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(dir_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << contents;
}

}  // namespace hapstack::testing
