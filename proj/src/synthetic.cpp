#include "hapstack/synthetic.hpp"

#include <ostream>
#include <unordered_set>

#include "hapstack/error.hpp"

namespace hapstack::synthetic {
namespace {

const std::vector<std::string> kSuffixes = {"s",  "es", "ed",   "ing",  "ly",  "er",  "est",
                                            "less", "ness", "ful", "ment", "ion", "able", "ish"};

std::vector<std::string> base_tokens() {
  std::vector<std::string> tokens = {std::string(kPadToken), std::string(kUnkToken),
                                     std::string(kClsToken), std::string(kSepToken)};
  for (char c = 33; c < 127; ++c) tokens.emplace_back(1, c);
  for (char c = 33; c < 127; ++c) tokens.push_back(std::string(kContinuationPrefix) + c);
  return tokens;
}

}  // namespace

const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = {
      "the",    "people",  "are",    "very",   "nice",    "bad",    "indeed", "those",
      "good",   "day",     "we",     "they",   "said",    "that",   "this",   "was",
      "is",     "a",       "an",     "and",    "or",      "but",    "with",   "from",
      "into",   "over",    "under",  "about",  "after",   "before", "city",   "river",
      "house",  "street",  "market", "school", "friend",  "family", "game",   "team",
      "music",  "book",    "story",  "letter", "morning", "evening", "summer", "winter",
      "quick",  "slow",    "bright", "dark",   "happy",   "sad",    "small",  "large",
      "walk",   "run",     "read",   "write",  "speak",   "listen", "watch",  "build",
      "shame",  "stupid",  "idiot",  "fool",   "hate",    "awful",  "terrible", "kind",
      "roses",  "weather", "window", "garden", "coffee",  "table",  "paper",  "light"};
  return pool;
}

std::size_t min_vocab_size() { return base_tokens().size(); }

Vocabulary make_vocab(std::size_t size) {
  auto tokens = base_tokens();
  if (size < tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic vocabulary needs at least " +
                                                 std::to_string(tokens.size()) + " tokens");
  }
  std::unordered_set<std::string> seen(tokens.begin(), tokens.end());
  auto add = [&](std::string t) {
    if (tokens.size() < size && seen.insert(t).second) tokens.push_back(std::move(t));
  };
  for (const auto& w : word_pool()) add(w);
  for (const auto& s : kSuffixes) add(std::string(kContinuationPrefix) + s);
  for (char a = 'a'; a <= 'z'; ++a) {
    for (char b = 'a'; b <= 'z'; ++b) add(std::string(kContinuationPrefix) + a + b);
  }
  for (std::size_t i = 0; tokens.size() < size; ++i) add("[unused" + std::to_string(i) + "]");
  return Vocabulary(std::move(tokens));
}

std::string make_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  const auto& pool = word_pool();
  std::uniform_int_distribution<std::size_t> count(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const std::size_t n = count(rng);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    std::string w = pool[pick(rng)];
    if (i == 0 && !w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (i) s += ' ';
    s += w;
  }
  s += '.';
  return s;
}

std::vector<Document> make_corpus(std::size_t documents, std::size_t sentences_per_document,
                                  std::uint64_t seed, std::size_t min_words,
                                  std::size_t max_words) {
  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  docs.reserve(documents);
  for (std::size_t d = 0; d < documents; ++d) {
    Document doc;
    doc.id = "doc" + std::to_string(d);
    for (std::size_t s = 0; s < sentences_per_document; ++s) {
      if (s) doc.text += (s % 7 == 0) ? '\n' : ' ';
      doc.text += make_sentence(rng, min_words, max_words);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << d.id << '\t' << escape_corpus_text(d.text) << '\n';
}

}  // namespace hapstack::synthetic
