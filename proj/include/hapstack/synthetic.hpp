#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "hapstack/pipeline.hpp"
#include "hapstack/wordpiece.hpp"

// Self-contained stand-ins for real assets, used by init-random, the
// benchmarks and the tests.
namespace hapstack::synthetic {

// Smallest size make_vocab accepts: the four specials plus every printable
// ASCII character as a word-initial and a continuation piece, which makes any
// ASCII word tokenizable without [UNK].
std::size_t min_vocab_size();

// Specials at ids 0..3 ([PAD], [UNK], [CLS], [SEP]), then characters, common
// English words and suffix pieces, then [unusedN] filler up to `size`.
// Throws Error{kInvalidArgument} if size < min_vocab_size().
Vocabulary make_vocab(std::size_t size);

// Words for generated sentences.
const std::vector<std::string>& word_pool();

std::string make_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words);

std::vector<Document> make_corpus(std::size_t documents, std::size_t sentences_per_document,
                                  std::uint64_t seed, std::size_t min_words = 4,
                                  std::size_t max_words = 10);

// One corpus line per document.
void write_corpus(std::ostream& out, const std::vector<Document>& docs);

}  // namespace hapstack::synthetic
