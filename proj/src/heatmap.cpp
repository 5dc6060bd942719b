#include "hapstack/heatmap.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>

#include "hapstack/error.hpp"

namespace hapstack {

AttentionHeatmap compute_heatmap(const ForwardOutput& output, const TokenizedSequence& seq,
                                 const Vocabulary& vocab, const HeatmapOptions& options) {
  const std::size_t t_full = seq.ids.size();
  if (output.attentions.shape.size() != 4 || output.attentions.shape[2] != t_full ||
      output.attentions.shape[3] != t_full) {
    throw Error(ErrorCode::kShapeMismatch,
                "attention tensor does not match a sequence of " + std::to_string(t_full) +
                    " tokens (were attentions captured?)");
  }
  const std::size_t layers = output.attentions.shape[0];
  const std::size_t heads = output.attentions.shape[1];
  if (options.head && *options.head >= heads) {
    throw Error(ErrorCode::kInvalidArgument, "head index out of range");
  }
  const std::size_t n = seq.real_length();

  AttentionHeatmap h;
  h.tokens.reserve(n);
  for (std::size_t i = 0; i < n; ++i) h.tokens.push_back(vocab.token(seq.ids[i]));

  h.matrix.assign(n * n, 0.0);
  const std::size_t first_head = options.head.value_or(0);
  const std::size_t last_head = options.head ? first_head + 1 : heads;
  for (std::size_t head = first_head; head < last_head; ++head) {
    const auto a = output.attention(layers - 1, head);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) h.matrix[i * n + j] += a[i * t_full + j];
    }
  }
  const double inv = 1.0 / static_cast<double>(last_head - first_head);
  for (double& v : h.matrix) v *= inv;
  h.cls_row.assign(h.matrix.begin(), h.matrix.begin() + static_cast<std::ptrdiff_t>(n));

  std::vector<bool> in_word(n, false);
  for (const WordSpan& span : seq.word_spans) {
    double mass = 0.0;
    for (std::size_t p = span.first_piece; p < span.first_piece + span.piece_count && p < n; ++p) {
      mass += h.cls_row[p];
      in_word[p] = true;
    }
    h.word_attributions.push_back({seq.words.at(span.word_index), mass});
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (!in_word[p]) h.special_attributions.push_back({h.tokens[p], h.cls_row[p]});
  }
  return h;
}

std::vector<AttentionHeatmap> compute_heatmaps_batch(std::span<const ForwardOutput> outputs,
                                                     std::span<const TokenizedSequence> seqs,
                                                     const Vocabulary& vocab,
                                                     const HeatmapOptions& options) {
  if (outputs.size() != seqs.size()) {
    throw Error(ErrorCode::kShapeMismatch, std::to_string(outputs.size()) + " outputs for " +
                                               std::to_string(seqs.size()) + " sequences");
  }
  std::vector<AttentionHeatmap> maps(outputs.size());
  std::vector<std::exception_ptr> errors(outputs.size());
  const auto n = static_cast<std::ptrdiff_t>(outputs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      maps[k] = compute_heatmap(outputs[k], seqs[k], vocab, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return maps;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_heatmap(const AttentionHeatmap& h, HeatmapFormat format) {
  const std::size_t n = h.size();
  std::string out;
  if (format == HeatmapFormat::kKeyValueRecords) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out += "ATT " + std::to_string(i) + ' ' + std::to_string(j) + ' ' + fixed(h.at(i, j), 6) + '\n';
      }
    }
    for (const auto& w : h.word_attributions) out += "WORD " + w.label + ' ' + fixed(w.weight, 6) + '\n';
    return out;
  }

  std::size_t label_width = 0;
  std::size_t cell_width = 6;  // "0.0000"
  for (const auto& t : h.tokens) {
    label_width = std::max(label_width, t.size());
    cell_width = std::max(cell_width, t.size());
  }
  out += std::string(label_width, ' ');
  for (const auto& t : h.tokens) out += ' ' + pad_left(t, cell_width);
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out += pad_right(h.tokens[i], label_width);
    for (std::size_t j = 0; j < n; ++j) out += ' ' + pad_left(fixed(h.at(i, j), 4), cell_width);
    out += '\n';
  }
  return out;
}

}  // namespace hapstack
