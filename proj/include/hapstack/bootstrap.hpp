#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hapstack/model_io.hpp"
#include "hapstack/pipeline.hpp"

namespace hapstack {

// A toxic-word list for one language.
class Lexicon {
 public:
  // Terms are trimmed; throws Error{kInvalidArgument} if the list is empty or
  // a term is blank.
  Lexicon(const std::vector<std::string>& terms, std::string language_tag);

  const std::set<std::string>& terms() const { return terms_; }
  const std::string& language_tag() const { return language_tag_; }

 private:
  std::set<std::string> terms_;
  std::string language_tag_;
};

// One term per line; blank lines are ignored.
Lexicon parse_lexicon(std::string_view contents, std::string language_tag);
Lexicon load_lexicon(const std::filesystem::path& path, std::string language_tag);

enum class MatchMode {
  kExactSubstring,
  // Occurrence must be bounded by non-letters or the string edges. Bytes of
  // multi-byte UTF-8 sequences count as letters.
  kWordBoundary,
};

// "exact" / "word" (and the long enum spellings); throws Error{kInvalidArgument}.
MatchMode parse_match_mode(std::string_view name);

struct MatchOptions {
  MatchMode mode = MatchMode::kWordBoundary;
  // ASCII case folding of both sentence and terms.
  bool case_fold = false;
};

// Matched terms in lexicon (sorted) order, each at most once.
std::vector<std::string> match_terms(std::string_view sentence, const Lexicon& lexicon,
                                     const MatchOptions& options = {});

enum class HapLabel { kNegative = 0, kPositive = 1 };

struct LexiconSample {
  std::string sentence;
  HapLabel label = HapLabel::kNegative;
  std::vector<std::string> matched_terms;  // empty iff negative
};

std::vector<LexiconSample> label_corpus(std::span<const std::string> sentences,
                                        const Lexicon& lexicon, const MatchOptions& options = {});

struct BalancedSample {
  std::vector<LexiconSample> samples;  // in corpus order
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // How many the exhausted label fell short of an even split, and which one.
  std::size_t shortfall = 0;
  std::optional<HapLabel> short_label;
};

// Uniform sampling without replacement per label, aiming for target_size / 2
// of each (negatives take the odd one). Throws Error{kInvalidArgument} when
// target_size < 2 or exceeds the number of samples.
BalancedSample balanced_sample(std::span<const LexiconSample> samples, std::size_t target_size,
                               std::uint64_t seed);

// Scores every sentence, keeps hap >= min_hap, and uniformly samples up to
// `limit` of them (corpus order preserved). Output is meant for human review.
std::vector<std::pair<std::string, HapScore>> mine_high_confidence(
    std::span<const std::string> sentences, const ModelBundle& model, double min_hap,
    std::size_t limit, std::uint64_t seed, const ScoringOptions& options = {});

// <label 0|1>\t<sentence>\t<matched terms joined by ';'>
std::string format_sample(const LexiconSample& sample);

}  // namespace hapstack
