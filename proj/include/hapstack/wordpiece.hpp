#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hapstack {

using TokenId = std::int32_t;

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kContinuationPrefix = "##";

// Immutable WordPiece vocabulary; id = position in the token list.
class Vocabulary {
 public:
  // Throws Error{kDuplicateToken} or Error{kMissingSpecialToken}.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  // -1 when absent.
  TokenId find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token) >= 0; }

  TokenId pad_id() const { return pad_; }
  TokenId unk_id() const { return unk_; }
  TokenId cls_id() const { return cls_; }
  TokenId sep_id() const { return sep_; }
  bool is_special(TokenId id) const {
    return id == pad_ || id == unk_ || id == cls_ || id == sep_;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
  TokenId pad_ = -1, unk_ = -1, cls_ = -1, sep_ = -1;
};

// Parses the vocab file format: LF-separated, one token per line, id = line
// number. Only the final newline is stripped; no other trimming happens.
Vocabulary parse_vocab(std::string_view contents);
Vocabulary load_vocab(const std::filesystem::path& path);
// Inverse of parse_vocab.
std::string serialize_vocab(const Vocabulary& vocab);

struct TokenizerOptions {
  bool lowercase = false;
  // Words longer than this many code points become a single [UNK].
  std::size_t max_word_chars = 100;
};

struct WordSpan {
  std::size_t word_index = 0;
  std::size_t first_piece = 0;
  std::size_t piece_count = 0;

  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

struct TokenizedSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> attention_mask;
  // Pre-tokenized words; word_spans index into this list.
  std::vector<std::string> words;
  std::vector<WordSpan> word_spans;
  std::string original_text;

  std::size_t length() const { return ids.size(); }
  std::size_t real_length() const;

  friend bool operator==(const TokenizedSequence&, const TokenizedSequence&) = default;
};

// Whitespace split, with leading and trailing ASCII punctuation peeled off as
// one-character words.
std::vector<std::string> pre_tokenize(std::string_view text,
                                      const TokenizerOptions& options = {});

// Greedy longest-match-first WordPiece. Falls back to a single [UNK] when any
// position has no match.
std::vector<TokenId> tokenize_word(std::string_view word, const Vocabulary& vocab,
                                   const TokenizerOptions& options = {});

// [CLS] pieces... [SEP], truncated to max_length and optionally padded.
// Throws Error{kInvalidArgument} when max_length < 2.
TokenizedSequence encode(std::string_view text, const Vocabulary& vocab,
                         std::size_t max_length, bool pad_to_max,
                         const TokenizerOptions& options = {});

// Appends [PAD] / mask 0 up to length; no-op when already that long.
void pad_to(TokenizedSequence& seq, std::size_t length, TokenId pad_id);

}  // namespace hapstack
