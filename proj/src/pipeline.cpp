#include "hapstack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>

#include "hapstack/error.hpp"

namespace hapstack {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Runs body(i) for i in [0, n), on `workers` OpenMP threads when workers > 1.
// The first exception thrown by any item is rethrown after the loop.
template <typename Body>
void for_each_item(std::size_t n, std::size_t workers, Body&& body) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(workers))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

HapScore score_from_logits(std::span<const float> logits) {
  if (logits.size() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "HAP scoring needs exactly two logits");
  }
  const double l0 = logits[0];
  const double l1 = logits[1];
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m);
  const double e1 = std::exp(l1 - m);
  const double sum = e0 + e1;
  return HapScore{e0 / sum, e1 / sum};
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    const auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush(i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') &&
               (i + 1 == text.size() || is_space(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const std::size_t> lengths,
                                                   const ScoringOptions& options) {
  if (options.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!options.dynamic_batching) {
    for (std::size_t i = 0; i < order.size(); i += options.batch_size) {
      const std::size_t end = std::min(order.size(), i + options.batch_size);
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::size_t> current;
  for (std::size_t idx : order) {
    const std::size_t longest = std::max<std::size_t>(lengths[idx], 1);
    const std::size_t cap = std::max(options.batch_size, options.token_budget / longest);
    if (current.size() >= cap) {
      batches.push_back(std::move(current));
      current.clear();
    }
    current.push_back(idx);
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

std::vector<HapScore> score_sentences(std::span<const std::string> sentences,
                                      const ModelBundle& model, const ScoringOptions& options) {
  if (model.config.num_labels != 2) {
    throw Error(ErrorCode::kInvalidConfig, "HAP scoring needs a two-label classifier");
  }
  const std::size_t max_length = std::min(options.max_length, model.config.max_positions);
  std::vector<TokenizedSequence> seqs(sentences.size());
  std::vector<std::size_t> lengths(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    seqs[i] = encode(sentences[i], model.vocab, max_length, false, options.tokenizer);
    lengths[i] = seqs[i].ids.size();
  }
  const auto batches = plan_batches(lengths, options);

  std::vector<HapScore> scores(sentences.size());
  const ForwardOptions forward_options{.capture_attentions = false};
  for_each_item(batches.size(), options.workers, [&](std::size_t b) {
    const auto& idx = batches[b];
    std::size_t longest = 0;
    for (std::size_t i : idx) longest = std::max(longest, lengths[i]);
    std::vector<TokenizedSequence> batch(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      batch[k].ids = seqs[idx[k]].ids;
      batch[k].attention_mask = seqs[idx[k]].attention_mask;
      pad_to(batch[k], longest, model.vocab.pad_id());
    }
    const auto outputs = forward_batch(batch, model.weights, model.config, forward_options);
    for (std::size_t k = 0; k < idx.size(); ++k) scores[idx[k]] = score_from_logits(outputs[k].logits);
  });
  return scores;
}

FilterDecision decide(std::string doc_id, std::vector<std::pair<std::string, HapScore>> scored,
                      const FilterConfig& config) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(config.hap_threshold) || !in_unit(config.max_flagged_fraction)) {
    throw Error(ErrorCode::kInvalidArgument, "filter thresholds must lie in [0, 1]");
  }
  FilterDecision d;
  d.doc_id = std::move(doc_id);
  d.sentence_scores = std::move(scored);
  if (!d.sentence_scores.empty()) {
    const auto flagged = std::count_if(d.sentence_scores.begin(), d.sentence_scores.end(),
                                       [&](const auto& s) { return s.second.hap >= config.hap_threshold; });
    d.flagged_fraction = static_cast<double>(flagged) / static_cast<double>(d.sentence_scores.size());
  }
  d.kept = d.flagged_fraction <= config.max_flagged_fraction;
  return d;
}

FilterDecision filter_document(const Document& doc, const ModelBundle& model,
                               const FilterConfig& config, const ScoringOptions& options) {
  auto sentences = split_sentences(doc.text);
  const auto scores = score_sentences(sentences, model, options);
  std::vector<std::pair<std::string, HapScore>> scored;
  scored.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) scored.emplace_back(std::move(sentences[i]), scores[i]);
  return decide(doc.id, std::move(scored), config);
}

std::optional<Document> parse_corpus_line(std::string_view line) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos || tab == 0) return std::nullopt;
  Document doc;
  doc.id = std::string(line.substr(0, tab));
  const auto body = line.substr(tab + 1);
  doc.text.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '\\' && i + 1 < body.size()) {
      const char next = body[i + 1];
      if (next == 'n' || next == 't' || next == '\\') {
        doc.text += next == 'n' ? '\n' : next == 't' ? '\t' : '\\';
        ++i;
        continue;
      }
    }
    doc.text += body[i];
  }
  return doc;
}

std::string escape_corpus_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string format_decision(const FilterDecision& d) {
  std::string out = d.doc_id;
  out += '\t';
  out += d.kept ? '1' : '0';
  out += '\t';
  out += fixed6(d.flagged_fraction);
  out += '\t';
  for (std::size_t i = 0; i < d.sentence_scores.size(); ++i) {
    if (i) out += ',';
    out += fixed6(d.sentence_scores[i].second.hap);
  }
  return out;
}

std::string format_summary(const CorpusSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "processed=%zu\nskipped=%zu\nkept=%zu\ndiscarded=%zu\nwall_ms=%.3f\ndocs_per_s=%.3f\n",
                s.processed, s.skipped, s.kept, s.discarded, s.wall_ms, s.docs_per_s);
  return buf;
}

CorpusSummary run_corpus(std::istream& input, std::ostream& output, const ModelBundle& model,
                         const CorpusRunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  CorpusSummary summary;
  std::vector<Document> chunk;

  auto flush = [&] {
    std::vector<std::string> sentences;
    std::vector<std::size_t> bounds{0};
    for (const auto& doc : chunk) {
      for (auto& s : split_sentences(doc.text)) sentences.push_back(std::move(s));
      bounds.push_back(sentences.size());
    }
    const auto scores = score_sentences(sentences, model, config.scoring);
    for (std::size_t d = 0; d < chunk.size(); ++d) {
      std::vector<std::pair<std::string, HapScore>> scored;
      for (std::size_t i = bounds[d]; i < bounds[d + 1]; ++i) {
        scored.emplace_back(std::move(sentences[i]), scores[i]);
      }
      const auto decision = decide(std::move(chunk[d].id), std::move(scored), config.filter);
      output << format_decision(decision) << '\n';
      ++summary.processed;
      ++(decision.kept ? summary.kept : summary.discarded);
    }
    summary.sentences += sentences.size();
    chunk.clear();
  };

  const std::size_t chunk_docs = std::max<std::size_t>(config.chunk_docs, 1);
  std::string line;
  while (std::getline(input, line)) {
    if (auto doc = parse_corpus_line(line)) {
      chunk.push_back(std::move(*doc));
      if (chunk.size() >= chunk_docs) flush();
    } else {
      ++summary.skipped;
    }
  }
  flush();
  output.flush();
  if (!output) throw Error(ErrorCode::kIo, "writing decisions failed");

  summary.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  summary.docs_per_s =
      summary.wall_ms > 0.0 ? static_cast<double>(summary.processed) / (summary.wall_ms / 1000.0) : 0.0;
  return summary;
}

CorpusSummary run_corpus(const std::filesystem::path& input_path,
                         const std::filesystem::path& output_path, const ModelBundle& model,
                         const CorpusRunConfig& config) {
  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + input_path.string());
  std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + output_path.string() + " for writing");
  return run_corpus(in, out, model, config);
}

}  // namespace hapstack
