#include "hapstack/wordpiece.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hapstack/error.hpp"

namespace hapstack {
namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
         (u >= 123 && u <= 126);
}

// Byte offsets of every UTF-8 code point start, plus word.size() at the end.
// A stray continuation byte at the start counts as its own code point.
std::vector<std::size_t> code_point_bounds(std::string_view word) {
  std::vector<std::size_t> bounds;
  bounds.reserve(word.size() + 1);
  for (std::size_t i = 0; i < word.size(); ++i) {
    const auto u = static_cast<unsigned char>(word[i]);
    if ((u & 0xC0) != 0x80 || i == 0) bounds.push_back(i);
  }
  bounds.push_back(word.size());
  return bounds;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateToken,
                  "token '" + tokens_[i] + "' at line " + std::to_string(i) +
                      " duplicates line " + std::to_string(it->second));
    }
  }
  auto special = [this](std::string_view name) {
    const TokenId id = find(name);
    if (id < 0) {
      throw Error(ErrorCode::kMissingSpecialToken,
                  "vocabulary lacks " + std::string(name));
    }
    return id;
  };
  pad_ = special(kPadToken);
  unk_ = special(kUnkToken);
  cls_ = special(kClsToken);
  sep_ = special(kSepToken);
}

TokenId Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

Vocabulary parse_vocab(std::string_view contents) {
  std::vector<std::string> tokens;
  if (!contents.empty() && contents.back() == '\n') contents.remove_suffix(1);
  if (!contents.empty()) {
    std::size_t start = 0;
    while (true) {
      const std::size_t nl = contents.find('\n', start);
      if (nl == std::string_view::npos) {
        tokens.emplace_back(contents.substr(start));
        break;
      }
      tokens.emplace_back(contents.substr(start, nl - start));
      start = nl + 1;
    }
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vocab file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocab(buf.str());
}

std::string serialize_vocab(const Vocabulary& vocab) {
  std::string out;
  for (const auto& t : vocab.tokens()) {
    out += t;
    out += '\n';
  }
  return out;
}

std::size_t TokenizedSequence::real_length() const {
  return static_cast<std::size_t>(
      std::count(attention_mask.begin(), attention_mask.end(), std::uint8_t{1}));
}

std::vector<std::string> pre_tokenize(std::string_view text,
                                      const TokenizerOptions& options) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_ascii_space(text[i])) ++i;
    if (start == i) continue;

    std::string chunk(text.substr(start, i - start));
    if (options.lowercase) {
      std::transform(chunk.begin(), chunk.end(), chunk.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      });
    }
    std::size_t lead = 0;
    while (lead < chunk.size() && is_ascii_punct(chunk[lead])) ++lead;
    std::size_t trail = chunk.size();
    while (trail > lead && is_ascii_punct(chunk[trail - 1])) --trail;

    for (std::size_t p = 0; p < lead; ++p) words.emplace_back(1, chunk[p]);
    if (trail > lead) words.push_back(chunk.substr(lead, trail - lead));
    for (std::size_t p = trail; p < chunk.size(); ++p) words.emplace_back(1, chunk[p]);
  }
  return words;
}

std::vector<TokenId> tokenize_word(std::string_view word, const Vocabulary& vocab,
                                   const TokenizerOptions& options) {
  if (word.empty()) return {};
  const auto bounds = code_point_bounds(word);
  const std::size_t n_chars = bounds.size() - 1;
  if (n_chars > options.max_word_chars) return {vocab.unk_id()};

  std::vector<TokenId> pieces;
  std::string candidate;
  std::size_t start = 0;
  while (start < n_chars) {
    TokenId match = -1;
    std::size_t end = n_chars;
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate += kContinuationPrefix;
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      match = vocab.find(candidate);
      if (match >= 0) break;
    }
    if (match < 0) return {vocab.unk_id()};
    pieces.push_back(match);
    start = end;
  }
  return pieces;
}

TokenizedSequence encode(std::string_view text, const Vocabulary& vocab,
                         std::size_t max_length, bool pad_to_max,
                         const TokenizerOptions& options) {
  if (max_length < 2) {
    throw Error(ErrorCode::kInvalidArgument, "max_length must be at least 2");
  }
  TokenizedSequence seq;
  seq.original_text = std::string(text);
  seq.words = pre_tokenize(text, options);
  seq.ids.push_back(vocab.cls_id());

  const std::size_t budget = max_length - 2;
  for (std::size_t w = 0; w < seq.words.size(); ++w) {
    const std::size_t room = budget - (seq.ids.size() - 1);
    if (room == 0) break;
    auto pieces = tokenize_word(seq.words[w], vocab, options);
    const std::size_t take = std::min(room, pieces.size());
    if (take == 0) continue;
    seq.word_spans.push_back({w, seq.ids.size(), take});
    seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.begin() + static_cast<std::ptrdiff_t>(take));
  }
  seq.ids.push_back(vocab.sep_id());
  seq.attention_mask.assign(seq.ids.size(), 1);
  if (pad_to_max) pad_to(seq, max_length, vocab.pad_id());
  return seq;
}

void pad_to(TokenizedSequence& seq, std::size_t length, TokenId pad_id) {
  if (seq.ids.size() >= length) return;
  seq.ids.resize(length, pad_id);
  seq.attention_mask.resize(length, 0);
}

}  // namespace hapstack
