#include "hapstack/bootstrap.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hapstack/error.hpp"

namespace hapstack {
namespace {

std::string trim(std::string_view s) {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_letter(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

bool occurs(std::string_view text, std::string_view term, MatchMode mode) {
  for (std::size_t pos = text.find(term); pos != std::string_view::npos;
       pos = text.find(term, pos + 1)) {
    if (mode == MatchMode::kExactSubstring) return true;
    const std::size_t end = pos + term.size();
    const bool left = pos == 0 || !is_letter(text[pos - 1]);
    const bool right = end == text.size() || !is_letter(text[end]);
    if (left && right) return true;
  }
  return false;
}

}  // namespace

Lexicon::Lexicon(const std::vector<std::string>& terms, std::string language_tag)
    : language_tag_(std::move(language_tag)) {
  for (const auto& t : terms) {
    std::string term = trim(t);
    if (term.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon term is blank");
    terms_.insert(std::move(term));
  }
  if (terms_.empty()) throw Error(ErrorCode::kInvalidArgument, "lexicon is empty");
}

Lexicon parse_lexicon(std::string_view contents, std::string language_tag) {
  std::vector<std::string> terms;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) terms.push_back(line);
  }
  return Lexicon(terms, std::move(language_tag));
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string language_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str(), std::move(language_tag));
}

MatchMode parse_match_mode(std::string_view name) {
  if (name == "word" || name == "word-boundary") return MatchMode::kWordBoundary;
  if (name == "exact" || name == "exact-substring") return MatchMode::kExactSubstring;
  throw Error(ErrorCode::kInvalidArgument, "unknown match mode '" + std::string(name) + "'");
}

std::vector<std::string> match_terms(std::string_view sentence, const Lexicon& lexicon,
                                     const MatchOptions& options) {
  std::vector<std::string> matched;
  const std::string folded = options.case_fold ? fold(sentence) : std::string();
  const std::string_view text = options.case_fold ? std::string_view(folded) : sentence;
  for (const auto& term : lexicon.terms()) {
    const std::string folded_term = options.case_fold ? fold(term) : std::string();
    const std::string_view needle = options.case_fold ? std::string_view(folded_term) : term;
    if (occurs(text, needle, options.mode)) matched.push_back(term);
  }
  return matched;
}

std::vector<LexiconSample> label_corpus(std::span<const std::string> sentences,
                                        const Lexicon& lexicon, const MatchOptions& options) {
  std::vector<LexiconSample> out(sentences.size());
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& s = out[static_cast<std::size_t>(i)];
    s.sentence = sentences[static_cast<std::size_t>(i)];
    s.matched_terms = match_terms(s.sentence, lexicon, options);
    s.label = s.matched_terms.empty() ? HapLabel::kNegative : HapLabel::kPositive;
  }
  return out;
}

BalancedSample balanced_sample(std::span<const LexiconSample> samples, std::size_t target_size,
                               std::uint64_t seed) {
  if (target_size < 2) throw Error(ErrorCode::kInvalidArgument, "target size must be at least 2");
  if (target_size > samples.size()) {
    throw Error(ErrorCode::kInvalidArgument, "target size " + std::to_string(target_size) +
                                                 " exceeds " + std::to_string(samples.size()) +
                                                 " available samples");
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == HapLabel::kPositive ? pos : neg).push_back(i);
  }

  BalancedSample result;
  const std::size_t want_pos = target_size / 2;
  const std::size_t want_neg = target_size - want_pos;
  std::size_t take_pos = want_pos;
  std::size_t take_neg = want_neg;
  if (pos.size() < want_pos) {
    take_pos = pos.size();
    take_neg = target_size - take_pos;
    result.shortfall = want_pos - take_pos;
    result.short_label = HapLabel::kPositive;
  } else if (neg.size() < want_neg) {
    take_neg = neg.size();
    take_pos = target_size - take_neg;
    result.shortfall = want_neg - take_neg;
    result.short_label = HapLabel::kNegative;
  }

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> chosen(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(take_pos));
  chosen.insert(chosen.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(take_neg));
  std::sort(chosen.begin(), chosen.end());

  result.positives = take_pos;
  result.negatives = take_neg;
  result.samples.reserve(chosen.size());
  for (std::size_t i : chosen) result.samples.push_back(samples[i]);
  return result;
}

std::vector<std::pair<std::string, HapScore>> mine_high_confidence(
    std::span<const std::string> sentences, const ModelBundle& model, double min_hap,
    std::size_t limit, std::uint64_t seed, const ScoringOptions& options) {
  if (!(min_hap >= 0.0 && min_hap <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_hap must lie in [0, 1]");
  }
  const auto scores = score_sentences(sentences, model, options);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].hap >= min_hap) pool.push_back(i);
  }
  if (pool.size() > limit) {
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(limit);
    std::sort(pool.begin(), pool.end());
  }
  std::vector<std::pair<std::string, HapScore>> out;
  out.reserve(pool.size());
  for (std::size_t i : pool) out.emplace_back(sentences[i], scores[i]);
  return out;
}

std::string format_sample(const LexiconSample& s) {
  std::string out = s.label == HapLabel::kPositive ? "1\t" : "0\t";
  out += s.sentence;
  out += '\t';
  for (std::size_t i = 0; i < s.matched_terms.size(); ++i) {
    if (i) out += ';';
    out += s.matched_terms[i];
  }
  return out;
}

}  // namespace hapstack
