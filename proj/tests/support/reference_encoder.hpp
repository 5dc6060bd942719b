#pragma once

#include <vector>

#include "hapstack/encoder.hpp"
#include "hapstack/wordpiece.hpp"

namespace hapstack::testing {

struct ReferenceOutput {
  std::vector<double> logits;
  // [layer][head][row][col]
  std::vector<std::vector<std::vector<std::vector<double>>>> attentions;
};

// Straight-line double-precision encoder written from the architecture
// description alone: nested scalar loops, no hapstack kernels. Masked columns
// are excluded from the softmax outright rather than via an additive bias.
ReferenceOutput reference_forward(const TokenizedSequence& seq, const ModelWeights& weights,
                                  const EncoderConfig& config);

}  // namespace hapstack::testing
