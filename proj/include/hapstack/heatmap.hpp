#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hapstack/encoder.hpp"
#include "hapstack/wordpiece.hpp"

namespace hapstack {

struct Attribution {
  std::string label;
  double weight = 0.0;
};

// Head-mean attention of the final encoder block over the unmasked tokens.
struct AttentionHeatmap {
  std::vector<std::string> tokens;   // wordpieces, [CLS] and [SEP] included
  std::vector<double> matrix;        // [T x T] row-major, T = tokens.size()
  std::vector<double> cls_row;       // matrix row 0
  std::vector<Attribution> word_attributions;
  // [CLS]/[SEP] keep their own mass instead of being spread over words.
  std::vector<Attribution> special_attributions;

  std::size_t size() const { return tokens.size(); }
  double at(std::size_t i, std::size_t j) const { return matrix[i * tokens.size() + j]; }
};

struct HeatmapOptions {
  // Report a single head instead of the head mean; debugging aid.
  std::optional<std::size_t> head;
};

// Throws Error{kShapeMismatch} when output and seq disagree or attentions
// were not captured.
AttentionHeatmap compute_heatmap(const ForwardOutput& output, const TokenizedSequence& seq,
                                 const Vocabulary& vocab, const HeatmapOptions& options = {});

// Throws Error{kShapeMismatch} on length mismatch.
std::vector<AttentionHeatmap> compute_heatmaps_batch(std::span<const ForwardOutput> outputs,
                                                     std::span<const TokenizedSequence> seqs,
                                                     const Vocabulary& vocab,
                                                     const HeatmapOptions& options = {});

enum class HeatmapFormat { kTextGrid, kKeyValueRecords };

std::string render_heatmap(const AttentionHeatmap& heatmap, HeatmapFormat format);

}  // namespace hapstack
