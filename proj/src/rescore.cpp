#include "hapstack/rescore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "hapstack/error.hpp"

namespace hapstack {

Hypothesis combine_scores(Hypothesis h, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (!h.non_hap) throw Error(ErrorCode::kMissingScore, "hypothesis '" + h.text + "' has no non-HAP score");
  h.new_score = h.original_score + lambda * *h.non_hap;
  return h;
}

std::vector<Hypothesis> rescore_beam(std::vector<Hypothesis> hyps, const ModelBundle* model,
                                     double lambda, const ScoringOptions& options) {
  if (hyps.empty()) throw Error(ErrorCode::kEmptyInput, "cannot rescore an empty beam");
  std::vector<std::size_t> missing;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyps[i].input_rank = i;
    if (!hyps[i].non_hap) {
      missing.push_back(i);
      texts.push_back(hyps[i].text);
    }
  }
  if (!missing.empty()) {
    if (model == nullptr) {
      throw Error(ErrorCode::kMissingScore, std::to_string(missing.size()) +
                                                " hypotheses lack a non-HAP score and no model was given");
    }
    const auto scores = score_sentences(texts, *model, options);
    for (std::size_t k = 0; k < missing.size(); ++k) hyps[missing[k]].non_hap = scores[k].non_hap;
  }
  for (auto& h : hyps) h = combine_scores(std::move(h), lambda);
  std::stable_sort(hyps.begin(), hyps.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.new_score > b.new_score; });
  return hyps;
}

const Hypothesis& select_best(std::span<const Hypothesis> ranked) {
  if (ranked.empty()) throw Error(ErrorCode::kEmptyInput, "no hypotheses to select from");
  return ranked.front();
}

namespace {

bool parse_double(std::string_view s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<Hypothesis> parse_beam(std::string_view contents) {
  std::vector<Hypothesis> hyps;
  std::size_t line_no = 0;
  while (!contents.empty()) {
    const auto nl = contents.find('\n');
    std::string_view line = contents.substr(0, nl);
    contents = nl == std::string_view::npos ? std::string_view{} : contents.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    auto bad = [line_no](const std::string& why) {
      return Error(ErrorCode::kInvalidArgument, "beam line " + std::to_string(line_no) + ": " + why);
    };
    const auto tab1 = line.find('\t');
    if (tab1 == std::string_view::npos) throw bad("expected <score>\\t<text>");
    Hypothesis h;
    if (!parse_double(line.substr(0, tab1), h.original_score)) throw bad("bad original score");
    auto rest = line.substr(tab1 + 1);
    const auto tab2 = rest.find('\t');
    h.text = std::string(rest.substr(0, tab2));
    if (tab2 != std::string_view::npos) {
      double v = 0.0;
      if (!parse_double(rest.substr(tab2 + 1), v) || v < 0.0 || v > 1.0) {
        throw bad("preset non-HAP score must be a number in [0, 1]");
      }
      h.non_hap = v;
    }
    hyps.push_back(std::move(h));
  }
  return hyps;
}

std::string format_ranked(std::span<const Hypothesis> ranked) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& h = ranked[i];
    out += std::to_string(i + 1);
    std::snprintf(buf, sizeof(buf), "\t%.6f\t", h.new_score);
    out += buf;
    out += shortest(h.original_score);
    std::snprintf(buf, sizeof(buf), "\t%.6f\t", h.non_hap.value_or(0.0));
    out += buf;
    out += h.text;
    out += '\n';
  }
  return out;
}

}  // namespace hapstack
