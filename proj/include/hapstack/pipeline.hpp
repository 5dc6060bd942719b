#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hapstack/model_io.hpp"

namespace hapstack {

// Probability pair from the two-way classifier head; label 1 is HAP.
struct HapScore {
  double non_hap = 0.5;
  double hap = 0.5;
};

// Two-label softmax, computed in double.
HapScore score_from_logits(std::span<const float> logits);

// Splits after '.', '!' or '?' when followed by whitespace or end of text, and
// at every newline. Terminators stay with their sentence; fragments are
// trimmed and empty ones dropped.
std::vector<std::string> split_sentences(std::string_view text);

struct ScoringOptions {
  std::size_t batch_size = 32;
  // Clamped to the model's max_positions.
  std::size_t max_length = 512;
  // Group sentences of similar token length; otherwise batches follow input
  // order.
  bool dynamic_batching = true;
  // Dynamic batches hold up to max(batch_size, token_budget / longest) items.
  std::size_t token_budget = 4096;
  // Batches scored concurrently. With one worker the kernels themselves run
  // multi-threaded instead.
  std::size_t workers = 1;
  TokenizerOptions tokenizer;
};

// Indices into `lengths` grouped into batches. Deterministic in its inputs and
// independent of options.workers.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const std::size_t> lengths,
                                                   const ScoringOptions& options);

// Scores in input order. Results do not depend on batch composition beyond
// float rounding (1e-5).
std::vector<HapScore> score_sentences(std::span<const std::string> sentences,
                                      const ModelBundle& model, const ScoringOptions& options = {});

struct Document {
  std::string id;
  std::string text;
};

struct FilterConfig {
  // A sentence is flagged when hap >= hap_threshold.
  double hap_threshold = 0.5;
  // A document is kept when its flagged fraction is <= this value.
  double max_flagged_fraction = 0.1;
};

struct FilterDecision {
  std::string doc_id;
  std::vector<std::pair<std::string, HapScore>> sentence_scores;
  double flagged_fraction = 0.0;
  bool kept = true;
};

// The discard rule on already-scored sentences. Throws
// Error{kInvalidArgument} for thresholds outside [0, 1].
FilterDecision decide(std::string doc_id, std::vector<std::pair<std::string, HapScore>> scored,
                      const FilterConfig& config);

FilterDecision filter_document(const Document& doc, const ModelBundle& model,
                               const FilterConfig& config, const ScoringOptions& options = {});

// Corpus line: <id>\t<text>, where text escapes LF as \n (also \t and \\).
// Returns nullopt for malformed lines.
std::optional<Document> parse_corpus_line(std::string_view line);
std::string escape_corpus_text(std::string_view text);

// <id>\t<kept 0|1>\t<flagged_fraction %.6f>\t<hap scores %.6f, comma-joined>
std::string format_decision(const FilterDecision& decision);

struct CorpusRunConfig {
  FilterConfig filter;
  ScoringOptions scoring;
  // Documents read and scored together; output order is input order.
  std::size_t chunk_docs = 256;
};

struct CorpusSummary {
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::size_t kept = 0;
  std::size_t discarded = 0;
  std::size_t sentences = 0;
  double wall_ms = 0.0;
  double docs_per_s = 0.0;
};

// processed=, skipped=, kept=, discarded=, wall_ms=, docs_per_s= lines.
std::string format_summary(const CorpusSummary& summary);

CorpusSummary run_corpus(std::istream& input, std::ostream& output, const ModelBundle& model,
                         const CorpusRunConfig& config);
CorpusSummary run_corpus(const std::filesystem::path& input_path,
                         const std::filesystem::path& output_path, const ModelBundle& model,
                         const CorpusRunConfig& config);

}  // namespace hapstack
