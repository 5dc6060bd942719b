#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hapstack/model_io.hpp"
#include "hapstack/pipeline.hpp"

namespace hapstack {

// One completed beam hypothesis. original_score is the generator's score as
// given (log-likelihood or likelihood); it is never normalized.
struct Hypothesis {
  std::string text;
  double original_score = 0.0;
  std::optional<double> non_hap;
  double new_score = 0.0;
  // Position in the beam as supplied; breaks ties between equal new scores.
  std::size_t input_rank = 0;
};

// new_score = original_score + lambda * non_hap. Throws Error{kMissingScore}
// when non_hap is unset and Error{kInvalidArgument} when lambda < 0.
Hypothesis combine_scores(Hypothesis h, double lambda);

// Fills missing non_hap values with the classifier (model may be null when
// every hypothesis carries a preset), combines, and sorts by new_score
// descending with ties kept in input order. Throws Error{kEmptyInput} on an
// empty beam and Error{kMissingScore} when scores are missing and no model
// is given.
std::vector<Hypothesis> rescore_beam(std::vector<Hypothesis> hyps, const ModelBundle* model,
                                     double lambda, const ScoringOptions& options = {});

// First element of a ranked beam. Throws Error{kEmptyInput}.
const Hypothesis& select_best(std::span<const Hypothesis> ranked);

// Beam file: <original_score>\t<text>[\t<non_hap>] per line. Throws
// Error{kInvalidArgument} with the line number on malformed input.
std::vector<Hypothesis> parse_beam(std::string_view contents);

// <rank>\t<new_score %.6f>\t<original_score>\t<non_hap %.6f>\t<text>, rank from 1.
std::string format_ranked(std::span<const Hypothesis> ranked);

}  // namespace hapstack
